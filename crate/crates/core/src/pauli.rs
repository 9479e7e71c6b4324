//! Pauli strings and real-weighted sums of them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{named, Matrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix {
        match self {
            Pauli::X => named::x(),
            Pauli::Y => named::y(),
            Pauli::Z => named::z(),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// `coeff · ⊗_q factors[q]`, identity on every qubit not in `factors`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coeff: f64,
    factors: BTreeMap<usize, Pauli>,
}

impl PauliString {
    pub fn new(coeff: f64, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        PauliString {
            coeff,
            factors: factors.into_iter().collect(),
        }
    }

    pub fn identity(coeff: f64) -> Self {
        PauliString::new(coeff, [])
    }

    pub fn single(coeff: f64, qubit: usize, p: Pauli) -> Self {
        PauliString::new(coeff, [(qubit, p)])
    }

    pub fn factors(&self) -> &BTreeMap<usize, Pauli> {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    pub fn with_coeff(&self, coeff: f64) -> Self {
        PauliString {
            coeff,
            factors: self.factors.clone(),
        }
    }

    /// Two Pauli strings commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let clashes = self
            .factors
            .iter()
            .filter(|(q, p)| other.factors.get(q).is_some_and(|o| o != *p))
            .count();
        clashes % 2 == 0
    }

    /// Bit masks `(flip, phase)`: qubits carrying X or Y, and qubits carrying Y or Z.
    pub fn masks(&self) -> (u64, u64) {
        let mut flip = 0u64;
        let mut phase = 0u64;
        for (&q, &p) in &self.factors {
            match p {
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    phase |= 1 << q;
                }
                Pauli::Z => phase |= 1 << q,
            }
        }
        (flip, phase)
    }

    pub fn num_y(&self) -> usize {
        self.factors.values().filter(|&&p| p == Pauli::Y).count()
    }

    /// Dense matrix of the string (coefficient included) in the local basis
    /// of `targets`. Every factor must act within `targets`.
    pub fn matrix_on(&self, targets: &[usize]) -> Result<Matrix> {
        for q in self.support() {
            if !targets.contains(&q) {
                return Err(Error::InvalidArgument(format!(
                    "Pauli factor on qubit {q} outside targets {targets:?}"
                )));
            }
        }
        // kron builds high bits first, so walk targets from last to first.
        let mut m = Matrix::identity(1);
        for &t in targets.iter().rev() {
            let f = match self.factors.get(&t) {
                Some(p) => p.matrix(),
                None => Matrix::identity(2),
            };
            m = m.kron(&f);
        }
        Ok(m.scale(C64::new(self.coeff, 0.0)))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        if self.factors.is_empty() {
            return f.write_str("·I");
        }
        for (q, p) in &self.factors {
            write!(f, "·{p}{q}")?;
        }
        Ok(())
    }
}

/// Real linear combination of Pauli strings; terms with equal factor maps are merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new() -> Self {
        PauliSum::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = PauliString>) -> Self {
        let mut sum = PauliSum::new();
        for t in terms {
            sum.push(t);
        }
        sum
    }

    pub fn single(coeff: f64, qubit: usize, p: Pauli) -> Self {
        PauliSum::from_terms([PauliString::single(coeff, qubit, p)])
    }

    pub fn push(&mut self, term: PauliString) {
        match self.terms.iter_mut().find(|t| t.factors == term.factors) {
            Some(existing) => existing.coeff += term.coeff,
            None => self.terms.push(term),
        }
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: f64) -> PauliSum {
        PauliSum {
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coeff(t.coeff * s))
                .collect(),
        }
    }

    pub fn plus(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out
    }

    /// `Σ_k weights[k]·sums[k]`.
    pub fn weighted(sums: &[PauliSum], weights: &[f64]) -> PauliSum {
        assert_eq!(sums.len(), weights.len());
        let mut out = PauliSum::new();
        for (s, &w) in sums.iter().zip(weights) {
            for t in &s.terms {
                out.push(t.with_coeff(t.coeff * w));
            }
        }
        out
    }

    /// Sum of absolute coefficients.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.terms.iter().filter_map(|t| t.max_qubit()).max()
    }

    /// Sorted union of the supports of all terms.
    pub fn support(&self) -> Vec<usize> {
        let mut qs: Vec<usize> = self.terms.iter().flat_map(|t| t.support()).collect();
        qs.sort_unstable();
        qs.dedup();
        qs
    }

    /// First pair of non-commuting terms, if any.
    pub fn first_noncommuting_pair(&self) -> Option<(usize, usize)> {
        for i in 0..self.terms.len() {
            for j in i + 1..self.terms.len() {
                if !self.terms[i].commutes_with(&self.terms[j]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn all_commute(&self) -> bool {
        self.first_noncommuting_pair().is_none()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_finite())
    }

    pub fn matrix_on(&self, targets: &[usize]) -> Result<Matrix> {
        let mut m = Matrix::zeros(1 << targets.len());
        for t in &self.terms {
            m = m.add(&t.matrix_on(targets)?);
        }
        Ok(m)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl From<PauliString> for PauliSum {
    fn from(t: PauliString) -> Self {
        PauliSum::from_terms([t])
    }
}
