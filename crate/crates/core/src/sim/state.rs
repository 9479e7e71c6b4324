use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64, ONE, ZERO};
use crate::pauli::PauliString;

/// Default register cap: 2^26 amplitudes is 1 GiB.
pub const DEFAULT_MAX_QUBITS: usize = 26;

/// Largest register the simulator will allocate. `QCFLOW_MAX_QUBITS` overrides
/// the default.
pub fn max_qubits() -> usize {
    std::env::var("QCFLOW_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
        .min(63)
}

pub fn check_qubit_limit(num_qubits: usize) -> Result<()> {
    let max = max_qubits();
    if num_qubits > max {
        return Err(Error::QubitLimit { num_qubits, max });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        StateVector::basis(num_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_limit(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps amplitudes that must have power-of-two length and unit norm (1e-9).
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Shape(format!("{} amplitudes", amps.len())));
        }
        let num_qubits = amps.len().trailing_zeros() as usize;
        check_qubit_limit(num_qubits)?;
        let s = StateVector { num_qubits, amps };
        if (s.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "state norm² {} is not 1",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    /// Unnormalized vector, for intermediate quantities such as `O|ψ⟩`.
    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        debug_assert!(amps.len().is_power_of_two());
        StateVector {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for &q in targets {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        Ok(())
    }

    /// Applies a dense unitary whose local bit `i` is `targets[i]`.
    pub fn apply_matrix(&mut self, m: &Matrix, targets: &[usize]) -> Result<()> {
        self.check_targets(targets)?;
        if m.dim() != 1 << targets.len() {
            return Err(Error::Shape(format!(
                "{}x{} matrix on {} target(s)",
                m.dim(),
                m.dim(),
                targets.len()
            )));
        }
        match targets.len() {
            1 => apply_1q(&mut self.amps, m, targets[0]),
            2 => apply_2q(&mut self.amps, m, targets[0], targets[1]),
            _ => apply_kq(&mut self.amps, m, targets),
        }
        Ok(())
    }

    pub fn scale_global(&mut self, z: C64) {
        for a in &mut self.amps {
            *a *= z;
        }
    }

    /// `exp(−i·eta·P)` for a Pauli string `P` (its coefficient is ignored).
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, eta: f64) -> Result<()> {
        self.check_targets(&p.support().collect::<Vec<_>>())?;
        let (c, s) = (eta.cos(), eta.sin());
        let (flip, phase) = p.masks();
        let (flip, phase) = (flip as usize, phase as usize);
        if flip == 0 {
            let plus = C64::new(c, -s);
            let minus = C64::new(c, s);
            for (x, a) in self.amps.iter_mut().enumerate() {
                *a *= if (x & phase).count_ones() % 2 == 0 { plus } else { minus };
            }
            return Ok(());
        }
        // P|y⟩ = i^{nY} (−1)^{|y & phase|} |y ⊕ flip⟩
        let iy = i_pow(p.num_y());
        let top = 1usize << (usize::BITS - 1 - flip.leading_zeros());
        let ms = C64::new(0.0, -s) * iy;
        for x in 0..self.amps.len() {
            if x & top != 0 {
                continue;
            }
            let y = x ^ flip;
            let sx = if (x & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let sy = if (y & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let (ax, ay) = (self.amps[x], self.amps[y]);
            // (Pψ)[x] = i^{nY}·sy·ψ[y], (Pψ)[y] = i^{nY}·sx·ψ[x]
            self.amps[x] = ax * c + ms * sy * ay;
            self.amps[y] = ay * c + ms * sx * ax;
        }
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩` for a Pauli string without its coefficient.
    pub fn pauli_expectation(&self, p: &PauliString) -> f64 {
        let (flip, phase) = p.masks();
        let (flip, phase) = (flip as usize, phase as usize);
        let sign = |x: usize| if (x & phase).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        if flip == 0 {
            return self
                .amps
                .iter()
                .enumerate()
                .map(|(x, a)| sign(x) * a.norm_sqr())
                .sum();
        }
        let mut acc = ZERO;
        for (x, a) in self.amps.iter().enumerate() {
            let y = x ^ flip;
            acc += a.conj() * self.amps[y] * sign(y);
        }
        let v = acc * i_pow(p.num_y());
        debug_assert!(v.im.abs() < 1e-10 * (1.0 + v.re.abs()));
        v.re
    }
}

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn apply_1q(amps: &mut [C64], m: &Matrix, q: usize) {
    let [m00, m01, m10, m11] = [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)];
    let s = 1usize << q;
    for block in amps.chunks_exact_mut(2 * s) {
        let (lo, hi) = block.split_at_mut(s);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m00 * x + m01 * y;
            *b = m10 * x + m11 * y;
        }
    }
}

fn apply_2q(amps: &mut [C64], m: &Matrix, t0: usize, t1: usize) {
    // Normalize so local bit 0 is the lower qubit.
    let owned;
    let (m, lo, hi) = if t0 < t1 {
        (m, t0, t1)
    } else {
        owned = m.permute_qubits(&[1, 0]);
        (&owned, t1, t0)
    };
    let u: [[C64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| m.get(r, c)));
    let (sl, sh) = (1usize << lo, 1usize << hi);
    for outer in amps.chunks_exact_mut(2 * sh) {
        let (a, b) = outer.split_at_mut(sh);
        for (a, b) in a.chunks_exact_mut(2 * sl).zip(b.chunks_exact_mut(2 * sl)) {
            let (a0, a1) = a.split_at_mut(sl);
            let (b0, b1) = b.split_at_mut(sl);
            for i in 0..sl {
                let v = [a0[i], a1[i], b0[i], b1[i]];
                let w: [C64; 4] = std::array::from_fn(|r| {
                    u[r][0] * v[0] + u[r][1] * v[1] + u[r][2] * v[2] + u[r][3] * v[3]
                });
                a0[i] = w[0];
                a1[i] = w[1];
                b0[i] = w[2];
                b1[i] = w[3];
            }
        }
    }
}

fn apply_kq(amps: &mut [C64], m: &Matrix, targets: &[usize]) {
    let k = targets.len();
    let d = 1usize << k;
    let offsets: Vec<usize> = (0..d)
        .map(|l| {
            (0..k)
                .filter(|&i| l >> i & 1 == 1)
                .map(|i| 1usize << targets[i])
                .sum()
        })
        .collect();
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let mut v = vec![ZERO; d];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, &o) in offsets.iter().enumerate() {
            v[l] = amps[base + o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, &x) in v.iter().enumerate() {
                acc += m.get(r, c) * x;
            }
            amps[base + o] = acc;
        }
    }
}
