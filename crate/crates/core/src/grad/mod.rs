//! Gradients of expectation values with respect to circuit symbols.
//!
//! Every engine returns a vector indexed by [`Circuit::symbols`] order together
//! with the number of expectation evaluations it spent.

mod adjoint;
mod finite_diff;
mod shift;
mod stochastic;

pub use adjoint::adjoint_grad;
pub use finite_diff::{finite_difference_grad, FdScheme};
pub use shift::{parameter_shift_component, parameter_shift_grad};
pub use stochastic::{stochastic_ps_grad, stochastic_ps_samples, StochasticConfig};

use crate::circuit::{Bindings, Circuit, ConcreteCircuit};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::rng::StreamKey;
use crate::sim::{expectation, run_on, sampled_expectation_state, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Exact,
    /// Shot estimates with `shots` per Pauli term; each evaluation draws from its
    /// own substream of `seed`.
    Sampled { shots: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct GradRequest {
    pub circuit: Circuit,
    pub observable: PauliSum,
    pub bindings: Bindings,
    pub estimator: Estimator,
    /// Input state; `|0…0⟩` when absent.
    pub initial_state: Option<StateVector>,
}

impl GradRequest {
    pub fn new(circuit: Circuit, observable: PauliSum, bindings: Bindings) -> Self {
        GradRequest {
            circuit,
            observable,
            bindings,
            estimator: Estimator::Exact,
            initial_state: None,
        }
    }

    pub fn sampled(mut self, shots: usize, seed: u64) -> Self {
        self.estimator = Estimator::Sampled { shots, seed };
        self
    }

    pub fn with_initial_state(mut self, state: StateVector) -> Self {
        self.initial_state = Some(state);
        self
    }

    /// The expectation value at the request's bindings.
    pub fn value(&self) -> Result<f64> {
        let c = self.circuit.resolve(&self.bindings)?;
        let state = self.run(&c)?;
        self.measure(&state, &self.observable, &[u64::MAX])
    }

    pub(crate) fn initial(&self) -> Result<StateVector> {
        match &self.initial_state {
            Some(s) => {
                if s.num_qubits() != self.circuit.num_qubits() {
                    return Err(Error::QubitCountMismatch {
                        left: s.num_qubits(),
                        right: self.circuit.num_qubits(),
                    });
                }
                Ok(s.clone())
            }
            None => StateVector::zero(self.circuit.num_qubits()),
        }
    }

    pub(crate) fn run(&self, c: &ConcreteCircuit) -> Result<StateVector> {
        let mut s = self.initial()?;
        run_on(&mut s, c)?;
        Ok(s)
    }

    /// One expectation evaluation. `path` selects the sampling substream.
    pub(crate) fn measure(&self, state: &StateVector, obs: &PauliSum, path: &[u64]) -> Result<f64> {
        match self.estimator {
            Estimator::Exact => expectation(state, obs),
            Estimator::Sampled { shots, seed } => {
                let key = path.iter().fold(StreamKey::new(seed), |k, &p| k.child(p));
                Ok(sampled_expectation_state(state, obs, shots, key)?.value)
            }
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        for s in self.circuit.symbols() {
            match self.bindings.get(&s) {
                None => return Err(Error::MissingBinding(s.to_string())),
                Some(v) if !v.is_finite() => return Err(Error::NonFiniteBinding(s.to_string())),
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradResult {
    pub gradient: Vec<f64>,
    pub evaluations: usize,
    /// Set when a sampling distribution had zero total weight.
    pub warning: Option<String>,
}

impl GradResult {
    pub(crate) fn new(gradient: Vec<f64>, evaluations: usize) -> Self {
        GradResult {
            gradient,
            evaluations,
            warning: None,
        }
    }
}
