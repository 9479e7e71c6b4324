//! Differentiable state-vector simulation of parameterized quantum circuits.
//!
//! Circuits are built from named gates and Pauli-generator exponentials with
//! symbolic parameters, resolved to concrete circuits, simulated (optionally
//! through a gate-fusion pass) and differentiated by finite differences or the
//! parameter-shift rule. A small reverse-mode graph connects quantum expectation
//! nodes with dense classical layers.

pub mod circuit;
pub mod error;
pub mod grad;
pub mod hybrid;
pub mod json;
pub mod linalg;
pub mod pauli;
pub mod rng;
pub mod sim;

pub use circuit::{
    bindings, compose, exponential_circuit, gate_matrix, resolve, Bindings, Circuit,
    ConcreteCircuit, Gate, GateKind, ParamExpr, Symbol,
};
pub use error::{Error, Result};
pub use linalg::{Matrix, C64};
pub use pauli::{Pauli, PauliString, PauliSum};
