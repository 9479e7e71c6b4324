//! Small dense complex matrices used for gates and fused blocks.
//!
//! Local basis convention: for a gate on targets `[t0, t1, ...]`, bit `i` of the
//! local index belongs to `targets[i]`, so `t0` is the least-significant bit.
//! [`Matrix::kron`] follows the same rule: in `a.kron(b)` the factor `b` acts on
//! the low bits.

use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is not a square.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data length");
        Matrix { dim, data }
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Self {
        Matrix::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Matrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits this matrix acts on. Panics if `dim` is not a power of two.
    pub fn num_qubits(&self) -> usize {
        assert!(self.dim.is_power_of_two());
        self.dim.trailing_zeros() as usize
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: C64) {
        self.data[row * self.dim + col] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Kronecker product; `other` occupies the low bits of the result index.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut out = Matrix::zeros(n);
        for ar in 0..a {
            for ac in 0..a {
                let x = self.data[ar * a + ac];
                if x == ZERO {
                    continue;
                }
                for br in 0..b {
                    for bc in 0..b {
                        out.data[(ar * b + br) * n + ac * b + bc] = x * other.data[br * b + bc];
                    }
                }
            }
        }
        out
    }

    /// Reorders local qubits: bit `i` of the result index is bit `perm[i]` of
    /// this matrix's index.
    pub fn permute_qubits(&self, perm: &[usize]) -> Matrix {
        let k = perm.len();
        assert_eq!(1 << k, self.dim);
        let map = |idx: usize| -> usize {
            let mut out = 0;
            for (i, &p) in perm.iter().enumerate() {
                out |= ((idx >> p) & 1) << i;
            }
            out
        };
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = self.data[map(r) * n + map(c)];
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U†U − I)_ij| <= tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Matrix::identity(self.dim)) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Matrix {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = m[(r, c)];
            }
        }
        out
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

/// `exp(-i·t·H)` for a Hermitian `H`, via its eigendecomposition.
pub fn expm_hermitian(h: &Matrix, t: f64) -> Matrix {
    let eig = h.to_nalgebra().symmetric_eigen();
    let v = &eig.eigenvectors;
    let n = h.dim();
    let mut out = Matrix::zeros(n);
    for k in 0..n {
        let phase = C64::from_polar(1.0, -t * eig.eigenvalues[k]);
        for r in 0..n {
            let vr = v[(r, k)] * phase;
            for c in 0..n {
                out.data[r * n + c] += vr * v[(c, k)].conj();
            }
        }
    }
    out
}

pub mod named {
    //! Fixed matrices of the named gate library.
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn x() -> Matrix {
        Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> Matrix {
        Matrix::from_vec(2, vec![ZERO, -I, I, ZERO])
    }

    pub fn z() -> Matrix {
        Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn h() -> Matrix {
        let s = FRAC_1_SQRT_2;
        Matrix::from_real(2, &[s, s, s, -s])
    }

    pub fn s() -> Matrix {
        Matrix::diagonal(&[ONE, I])
    }

    pub fn s_dagger() -> Matrix {
        Matrix::diagonal(&[ONE, -I])
    }

    pub fn t() -> Matrix {
        Matrix::diagonal(&[ONE, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])
    }

    pub fn cz() -> Matrix {
        Matrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, -1.0,
            ],
        )
    }

    /// CNOT with `targets = [control, target]`: control is local bit 0.
    pub fn cnot() -> Matrix {
        // |c t> has local index c + 2t; flips 1 <-> 3.
        Matrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        )
    }

    pub fn swap() -> Matrix {
        Matrix::from_real(
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        )
    }
}
