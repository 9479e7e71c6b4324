//! State-vector simulation.

mod batch;
mod fusion;
mod measure;
mod state;

pub use batch::{batch_execute, batch_execute_with};
pub use fusion::{apply_fused, fuse, FusedCircuit, FusedGate};
pub use measure::{
    expectation, sample, sample_keyed, sampled_expectation, sampled_expectation_state,
    sampled_expectation_with_error, tree_sum, Estimate, SampleBatch,
};
pub use state::{check_qubit_limit, max_qubits, StateVector, DEFAULT_MAX_QUBITS};

use crate::circuit::{generator_exp, ConcreteCircuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Applies one resolved gate. Commuting generators are applied term by term as
/// Pauli rotations; other gates go through their dense matrix.
pub fn apply_gate(state: &mut StateVector, g: &Gate) -> Result<()> {
    match g.kind() {
        GateKind::Fixed(m) => state.apply_matrix(m, g.targets()),
        GateKind::Exp {
            exponent,
            scale,
            generator,
        } => {
            if let Some(sym) = &exponent.symbol {
                return Err(Error::MissingBinding(sym.to_string()));
            }
            let angle = scale * exponent.constant;
            if generator.all_commute() {
                for t in generator.terms() {
                    if t.is_identity() {
                        state.scale_global(C64::from_polar(1.0, -angle * t.coeff));
                    } else {
                        state.apply_pauli_rotation(t, angle * t.coeff)?;
                    }
                }
                Ok(())
            } else {
                let m = generator_exp(generator, angle, g.targets())?;
                state.apply_matrix(&m, g.targets())
            }
        }
    }
}

/// Runs `c` on `state` in place, gate by gate.
pub fn run_on(state: &mut StateVector, c: &ConcreteCircuit) -> Result<()> {
    if state.num_qubits() != c.num_qubits() {
        return Err(Error::QubitCountMismatch {
            left: state.num_qubits(),
            right: c.num_qubits(),
        });
    }
    for g in c.gates() {
        apply_gate(state, g)?;
    }
    Ok(())
}

/// Runs `c` on `state` in place through the fusion pass.
pub fn run_fused_on(state: &mut StateVector, c: &ConcreteCircuit) -> Result<()> {
    if state.num_qubits() != c.num_qubits() {
        return Err(Error::QubitCountMismatch {
            left: state.num_qubits(),
            right: c.num_qubits(),
        });
    }
    for g in &fuse(c)?.gates {
        apply_fused(state, g)?;
    }
    Ok(())
}

/// `c|0…0⟩`.
pub fn simulate(c: &ConcreteCircuit, fuse_enabled: bool) -> Result<StateVector> {
    let mut state = StateVector::zero(c.num_qubits())?;
    if fuse_enabled {
        run_fused_on(&mut state, c)?;
    } else {
        run_on(&mut state, c)?;
    }
    Ok(state)
}
