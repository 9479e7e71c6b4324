use rayon::prelude::*;

use crate::circuit::{Bindings, Circuit, ConcreteCircuit, Symbol};
use crate::error::{Error, Result};
use crate::grad::{
    adjoint_grad, finite_difference_grad, parameter_shift_grad, stochastic_ps_grad, Estimator, FdScheme,
    GradRequest, StochasticConfig,
};
use crate::pauli::PauliSum;
use crate::rng::StreamKey;
use crate::sim::{expectation, run_on, sampled_expectation_state, StateVector};

use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Differentiator {
    ParameterShift,
    /// Shift-rule values from a forward and a backward sweep; exact estimator only.
    Adjoint,
    /// Central differences with step `eps`.
    FiniteDifference { eps: f64 },
    /// Stochastic parameter shift; `seed` is replaced by a per-row substream.
    Stochastic(StochasticConfig),
}

/// Expectation values of `observables` after `circuit`, as a differentiable
/// function of the circuit's symbols (columns in symbol order).
#[derive(Debug, Clone)]
pub struct QuantumNode {
    pub circuit: Circuit,
    pub observables: Vec<PauliSum>,
    pub differentiator: Differentiator,
    pub estimator: Estimator,
    symbols: Vec<Symbol>,
}

/// Input states for a batch of data circuits; `|0…0⟩` when there are none.
pub fn prepare_inputs(num_qubits: usize, data: &[ConcreteCircuit]) -> Result<Vec<StateVector>> {
    if data.is_empty() {
        return Ok(vec![StateVector::zero(num_qubits)?]);
    }
    data.par_iter()
        .map(|c| {
            if c.num_qubits() != num_qubits {
                return Err(Error::QubitCountMismatch {
                    left: c.num_qubits(),
                    right: num_qubits,
                });
            }
            let mut s = StateVector::zero(num_qubits)?;
            run_on(&mut s, c)?;
            Ok(s)
        })
        .collect()
}

fn batch_size(a: usize, b: usize) -> Result<usize> {
    match (a, b) {
        (a, b) if a == b => Ok(a),
        (1, b) => Ok(b),
        (a, 1) => Ok(a),
        (a, b) => Err(Error::Shape(format!(
            "{a} input states vs {b} parameter rows"
        ))),
    }
}

impl QuantumNode {
    pub fn new(
        circuit: Circuit,
        observables: Vec<PauliSum>,
        differentiator: Differentiator,
        estimator: Estimator,
    ) -> Result<Self> {
        if observables.is_empty() {
            return Err(Error::InvalidArgument("quantum node needs an observable".into()));
        }
        for o in &observables {
            if let Some(q) = o.max_qubit() {
                if q >= circuit.num_qubits() {
                    return Err(Error::QubitOutOfRange {
                        qubit: q,
                        num_qubits: circuit.num_qubits(),
                    });
                }
            }
        }
        let symbols = circuit.symbols();
        Ok(QuantumNode {
            circuit,
            observables,
            differentiator,
            estimator,
            symbols,
        })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn num_params(&self) -> usize {
        self.symbols.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.observables.len()
    }

    fn bindings(&self, params: &Tensor, b: usize) -> Result<Bindings> {
        if params.shape().len() != 2 || params.cols() != self.symbols.len() {
            return Err(Error::Shape(format!(
                "parameters {:?} for {} symbols",
                params.shape(),
                self.symbols.len()
            )));
        }
        let row = params.row(if params.rows() == 1 { 0 } else { b });
        Ok(self.symbols.iter().cloned().zip(row.iter().copied()).collect())
    }

    /// `[B, N]` expectations; `inputs` and `params` rows broadcast from 1.
    pub fn forward(&self, inputs: &[StateVector], params: &Tensor, key: StreamKey) -> Result<Tensor> {
        let b = batch_size(inputs.len(), params.rows())?;
        let rows: Vec<Vec<f64>> = (0..b)
            .into_par_iter()
            .map(|r| {
                let c = self.circuit.resolve(&self.bindings(params, r)?)?;
                let mut s = inputs[if inputs.len() == 1 { 0 } else { r }].clone();
                run_on(&mut s, &c)?;
                self.observables
                    .iter()
                    .enumerate()
                    .map(|(k, o)| match self.estimator {
                        Estimator::Exact => expectation(&s, o),
                        Estimator::Sampled { shots, .. } => Ok(sampled_expectation_state(
                            &s,
                            o,
                            shots,
                            key.child(r as u64).child(k as u64),
                        )?
                        .value),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut out = Tensor::zeros(vec![b, self.observables.len()]);
        for (r, row) in rows.iter().enumerate() {
            out.row_mut(r).copy_from_slice(row);
        }
        Ok(out)
    }

    /// `[B, M]` vector-Jacobian products: row `b` is the gradient of
    /// `⟨Σ_k upstream[b,k]·h_k⟩` with respect to the parameters of row `b`.
    pub fn backward(
        &self,
        inputs: &[StateVector],
        params: &Tensor,
        upstream: &Tensor,
        key: StreamKey,
    ) -> Result<Tensor> {
        let b = batch_size(inputs.len(), params.rows())?;
        if upstream.shape() != [b, self.observables.len()] {
            return Err(Error::Shape(format!(
                "upstream {:?}, expected [{b}, {}]",
                upstream.shape(),
                self.observables.len()
            )));
        }
        let m = self.symbols.len();
        let rows: Vec<Vec<f64>> = (0..b)
            .into_par_iter()
            .map(|r| {
                let g = upstream.row(r);
                if g.iter().all(|&x| x == 0.0) {
                    return Ok(vec![0.0; m]);
                }
                let h = PauliSum::weighted(&self.observables, g);
                let row_key = key.child(r as u64);
                let mut req = GradRequest::new(self.circuit.clone(), h, self.bindings(params, r)?)
                    .with_initial_state(inputs[if inputs.len() == 1 { 0 } else { r }].clone());
                if let Estimator::Sampled { shots, .. } = self.estimator {
                    req = req.sampled(shots, row_key.child(0).id());
                }
                let res = match self.differentiator {
                    Differentiator::ParameterShift => parameter_shift_grad(&req)?,
                    Differentiator::Adjoint => adjoint_grad(&req)?,
                    Differentiator::FiniteDifference { eps } => {
                        finite_difference_grad(&req, FdScheme::Central, eps)?
                    }
                    Differentiator::Stochastic(cfg) => stochastic_ps_grad(
                        &req,
                        &StochasticConfig {
                            seed: row_key.child(1).id(),
                            ..cfg
                        },
                    )?,
                };
                Ok(res.gradient)
            })
            .collect::<Result<_>>()?;
        let mut out = Tensor::zeros(vec![b, m]);
        for (r, row) in rows.iter().enumerate() {
            out.row_mut(r).copy_from_slice(row);
        }
        Ok(out)
    }
}
