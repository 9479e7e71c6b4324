use rand::Rng;

use crate::circuit::ConcreteCircuit;
use crate::error::{Error, Result};
use crate::linalg::named;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::rng::StreamKey;

use super::state::StateVector;
use super::simulate;

/// Pairwise (tree) sum; the reduction order depends only on the length.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => tree_sum(&xs[..n / 2]) + tree_sum(&xs[n / 2..]),
    }
}

fn check_observable(state: &StateVector, obs: &PauliSum) -> Result<()> {
    if let Some(q) = obs.max_qubit() {
        if q >= state.num_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: state.num_qubits(),
            });
        }
    }
    Ok(())
}

/// Exact `⟨ψ|obs|ψ⟩`.
pub fn expectation(state: &StateVector, obs: &PauliSum) -> Result<f64> {
    check_observable(state, obs)?;
    let vals: Vec<f64> = obs
        .terms()
        .iter()
        .map(|t| {
            if t.is_identity() {
                t.coeff
            } else {
                t.coeff * state.pauli_expectation(t)
            }
        })
        .collect();
    Ok(tree_sum(&vals))
}

/// Measured bitstrings; bit `q` of each entry is qubit `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch {
    pub num_qubits: usize,
    pub bitstrings: Vec<u64>,
}

impl SampleBatch {
    pub fn shots(&self) -> usize {
        self.bitstrings.len()
    }

    /// Bits of shot `i`, qubit 0 first.
    pub fn bits(&self, i: usize) -> Vec<u8> {
        (0..self.num_qubits)
            .map(|q| (self.bitstrings[i] >> q & 1) as u8)
            .collect()
    }
}

/// Draws `shots` independent outcomes from `|a_x|²` with a generator keyed by `key`.
pub fn sample_keyed(state: &StateVector, shots: usize, key: StreamKey) -> Result<SampleBatch> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = key.rng();
    let last = cdf.len() - 1;
    let bitstrings = (0..shots)
        .map(|_| {
            let u: f64 = rng.gen::<f64>() * total;
            // First index whose cumulative weight exceeds u; zero-weight
            // entries can never be selected.
            let mut i = cdf.partition_point(|&c| c <= u).min(last);
            while i > 0 && state.amplitudes()[i].norm_sqr() == 0.0 {
                i -= 1;
            }
            i as u64
        })
        .collect();
    Ok(SampleBatch {
        num_qubits: state.num_qubits(),
        bitstrings,
    })
}

pub fn sample(state: &StateVector, shots: usize, seed: u64) -> Result<SampleBatch> {
    sample_keyed(state, shots, StreamKey::new(seed))
}

/// Estimate of a sampled expectation and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

/// Samples one Pauli term in its eigenbasis: returns the mean of its ±1
/// eigenvalue and the unbiased sample variance of that mean.
fn sample_term(
    state: &StateVector,
    term: &PauliString,
    shots: usize,
    key: StreamKey,
) -> Result<(f64, f64)> {
    let mut rotated = state.clone();
    for (&q, &p) in term.factors() {
        match p {
            Pauli::X => rotated.apply_matrix(&named::h(), &[q])?,
            Pauli::Y => {
                rotated.apply_matrix(&named::s_dagger(), &[q])?;
                rotated.apply_matrix(&named::h(), &[q])?;
            }
            Pauli::Z => {}
        }
    }
    let support: u64 = term.support().map(|q| 1u64 << q).sum();
    let batch = sample_keyed(&rotated, shots, key)?;
    let plus = batch
        .bitstrings
        .iter()
        .filter(|&&b| (b & support).count_ones().is_multiple_of(2))
        .count() as f64;
    let n = shots as f64;
    let mean = (2.0 * plus - n) / n;
    let var = if shots > 1 {
        (1.0 - mean * mean) * n / (n - 1.0) / n
    } else {
        0.0
    };
    Ok((mean, var))
}

/// Per-term sampling of `obs` on an already prepared state. Term `k` draws from
/// substream `key.child(k)`.
pub fn sampled_expectation_state(
    state: &StateVector,
    obs: &PauliSum,
    shots_per_term: usize,
    key: StreamKey,
) -> Result<Estimate> {
    check_observable(state, obs)?;
    if shots_per_term == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut vals = Vec::with_capacity(obs.len());
    let mut vars = Vec::with_capacity(obs.len());
    for (k, t) in obs.terms().iter().enumerate() {
        if t.is_identity() {
            vals.push(t.coeff);
            continue;
        }
        let (m, v) = sample_term(state, t, shots_per_term, key.child(k as u64))?;
        vals.push(t.coeff * m);
        vars.push(t.coeff * t.coeff * v);
    }
    Ok(Estimate {
        value: tree_sum(&vals),
        std_err: tree_sum(&vars).sqrt(),
    })
}

/// Unbiased shot-based estimate of `⟨obs⟩` after running `c`.
pub fn sampled_expectation(
    c: &ConcreteCircuit,
    obs: &PauliSum,
    shots_per_term: usize,
    seed: u64,
) -> Result<f64> {
    Ok(sampled_expectation_with_error(c, obs, shots_per_term, seed)?.value)
}

pub fn sampled_expectation_with_error(
    c: &ConcreteCircuit,
    obs: &PauliSum,
    shots_per_term: usize,
    seed: u64,
) -> Result<Estimate> {
    let state = simulate(c, false)?;
    sampled_expectation_state(&state, obs, shots_per_term, StreamKey::new(seed))
}
