//! Independent dense oracles and random circuit generators shared by the
//! integration tests.
#![allow(dead_code)]

use qcflow::linalg::Matrix;
use qcflow::{Bindings, Circuit, Gate, ParamExpr, Pauli, PauliString, PauliSum, C64};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain row-major dense matrix for oracles.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<C64>,
}

impl Dense {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = C64::new(1.0, 0.0);
        }
        Dense { n, a }
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Dense {
            n: m.dim(),
            a: m.as_slice().to_vec(),
        }
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                for j in 0..n {
                    a[i * n + j] += x * o.a[k * n + j];
                }
            }
        }
        Dense { n, a }
    }

    pub fn scale(&self, s: C64) -> Dense {
        Dense {
            n: self.n,
            a: self.a.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, o: &Dense) -> Dense {
        Dense {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.a[i * self.n + j] * v[j]).sum())
            .collect()
    }

    pub fn max_diff(&self, o: &Dense) -> f64 {
        self.a
            .iter()
            .zip(&o.a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.a[i * self.n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Embeds a local matrix (bit `i` of its index is `targets[i]`) into `n` qubits
/// by the index formula `U[x][y] = m[loc(x)][loc(y)]` when `x`, `y` agree off
/// the targets.
pub fn embed(m: &Matrix, targets: &[usize], n: usize) -> Dense {
    let dim = 1usize << n;
    let mask: usize = targets.iter().map(|&t| 1 << t).sum();
    let loc = |x: usize| -> usize {
        targets
            .iter()
            .enumerate()
            .map(|(i, &t)| ((x >> t) & 1) << i)
            .sum()
    };
    let mut a = vec![C64::new(0.0, 0.0); dim * dim];
    for x in 0..dim {
        for y in 0..dim {
            if x & !mask == y & !mask {
                a[x * dim + y] = m.get(loc(x), loc(y));
            }
        }
    }
    Dense { n: dim, a }
}

/// Dense matrix of a Pauli sum on `n` qubits, built from single-qubit factors.
pub fn pauli_dense(s: &PauliSum, n: usize) -> Dense {
    let dim = 1usize << n;
    let mut out = Dense {
        n: dim,
        a: vec![C64::new(0.0, 0.0); dim * dim],
    };
    for t in s.terms() {
        let mut m = Dense::identity(dim).scale(C64::new(t.coeff, 0.0));
        for (&q, &p) in t.factors() {
            m = embed(&p.matrix(), &[q], n).mul(&m);
        }
        out = out.add(&m);
    }
    out
}

/// `exp(A)` by scaling and squaring with a 30-term Taylor series.
pub fn expm_taylor(a: &Dense) -> Dense {
    let mut s = 0;
    let mut scaled = a.clone();
    while scaled.norm1() > 0.25 {
        scaled = scaled.scale(C64::new(0.5, 0.0));
        s += 1;
    }
    let mut term = Dense::identity(a.n);
    let mut sum = Dense::identity(a.n);
    for k in 1..30 {
        term = term.mul(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum.mul(&sum);
    }
    sum
}

/// `exp(−i·t·H)`.
pub fn expm_herm(h: &Dense, t: f64) -> Dense {
    expm_taylor(&h.scale(C64::new(0.0, -t)))
}

/// Dense unitary of a circuit from each gate's local matrix.
pub fn circuit_unitary(c: &Circuit, b: &Bindings) -> Dense {
    let n = c.num_qubits();
    let mut u = Dense::identity(1 << n);
    for g in c.gates() {
        let m = qcflow::gate_matrix(g, b).unwrap();
        u = embed(&m, g.targets(), n).mul(&u);
    }
    u
}

pub fn random_state(n: usize, r: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..1 << n)
        .map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

pub fn random_unitary(dim: usize, r: &mut impl Rng) -> Matrix {
    // Gram-Schmidt on random complex columns.
    let mut cols: Vec<Vec<C64>> = Vec::new();
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
            .collect();
        for c in &cols {
            let d: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= d * y;
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            cols.push(v);
        }
    }
    let mut m = Matrix::zeros(dim);
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    m
}

pub fn random_pauli_string(n: usize, r: &mut impl Rng) -> PauliString {
    loop {
        let f: Vec<(usize, Pauli)> = (0..n)
            .filter_map(|q| match r.gen_range(0..4) {
                0 => None,
                1 => Some((q, Pauli::X)),
                2 => Some((q, Pauli::Y)),
                _ => Some((q, Pauli::Z)),
            })
            .collect();
        if !f.is_empty() {
            return PauliString::new(r.gen_range(-1.5..1.5), f);
        }
    }
}

pub fn random_pauli_sum(n: usize, terms: usize, r: &mut impl Rng) -> PauliSum {
    PauliSum::from_terms((0..terms).map(|_| random_pauli_string(n, r)))
}

fn pair(n: usize, r: &mut impl Rng) -> (usize, usize) {
    let a = r.gen_range(0..n);
    let mut b = r.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Random concrete circuit of ≤2-qubit gates drawn from the whole library.
pub fn random_concrete(n: usize, depth: usize, r: &mut impl Rng) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        let q = r.gen_range(0..n);
        let a: f64 = r.gen_range(-3.0..3.0);
        let g = match r.gen_range(0..14) {
            0 => Gate::h(q),
            1 => Gate::s(q),
            2 => Gate::t(q),
            3 => Gate::rx(q, a),
            4 => Gate::ry(q, a),
            5 => Gate::rz(q, a),
            6 => Gate::xpow(q, a),
            7 => Gate::ypow(q, a),
            _ if n < 2 => Gate::zpow(q, a),
            8 => {
                let (x, y) = pair(n, r);
                Gate::cz(x, y)
            }
            9 => {
                let (x, y) = pair(n, r);
                Gate::cnot(x, y)
            }
            10 => {
                let (x, y) = pair(n, r);
                Gate::swap(x, y)
            }
            11 => {
                let (x, y) = pair(n, r);
                Gate::cnot_pow(x, y, a)
            }
            12 => {
                let (x, y) = pair(n, r);
                Gate::matrix(&[x, y], random_unitary(4, r)).unwrap()
            }
            _ => {
                let (x, y) = pair(n, r);
                let p = [Pauli::X, Pauli::Y, Pauli::Z];
                let gen = PauliString::new(
                    r.gen_range(-1.0..1.0),
                    [(x, *p.choose(r).unwrap()), (y, *p.choose(r).unwrap())],
                );
                Gate::exp(&[x, y], a.into(), gen.into()).unwrap()
            }
        };
        c.push(g).unwrap();
    }
    c
}

/// Random circuit with up to `m` symbols, each gate parameterized by an
/// affine expression of one symbol; symbols may repeat.
pub fn random_parameterized(n: usize, depth: usize, m: usize, r: &mut impl Rng) -> (Circuit, Bindings) {
    let mut c = Circuit::new(n);
    let names: Vec<String> = (0..m).map(|i| format!("s{i}")).collect();
    for _ in 0..depth {
        let q = r.gen_range(0..n);
        let sym = names.choose(r).unwrap().as_str();
        let e = ParamExpr::affine(sym, r.gen_range(-2.0..2.0), r.gen_range(-1.0..1.0));
        let g = match r.gen_range(0..9) {
            0 => Gate::rx(q, e),
            1 => Gate::ry(q, e),
            2 => Gate::rz(q, e),
            3 => Gate::xpow(q, e),
            4 => Gate::h(q),
            _ if n < 2 => Gate::zpow(q, e),
            5 => {
                let (x, y) = pair(n, r);
                Gate::cnot_pow(x, y, e)
            }
            6 => {
                let (x, y) = pair(n, r);
                Gate::cz(x, y)
            }
            7 => {
                // Commuting two-term generator.
                let (x, y) = pair(n, r);
                let gen = PauliSum::from_terms([
                    PauliString::new(r.gen_range(-1.0..1.0), [(x, Pauli::X), (y, Pauli::X)]),
                    PauliString::new(r.gen_range(-1.0..1.0), [(x, Pauli::Y), (y, Pauli::Y)]),
                ]);
                Gate::exp(&[x, y], e, gen).unwrap()
            }
            _ => Gate::ypow(q, e),
        };
        c.push(g).unwrap();
    }
    let b = c
        .symbols()
        .into_iter()
        .map(|s| (s, r.gen_range(-3.0..3.0)))
        .collect();
    (c, b)
}
