//! Reverse-mode training of models that mix dense layers with quantum
//! expectation nodes.
//!
//! A quantum node's backward pass never builds its Jacobian. For upstream
//! gradient `g` it differentiates the single observable `Σ_k g_k·h_k`, which
//! gives the vector-Jacobian product directly.

mod adam;
mod dense;
mod loss;
mod model;
mod quantum;
mod tensor;

pub use adam::Adam;
pub use dense::{softmax, Activation, DenseGrads, DenseLayer};
pub use loss::{LossFn, CCE_EPS};
pub use model::{Batch, FitConfig, History, Model, NodeId};
pub use quantum::{prepare_inputs, Differentiator, QuantumNode};
pub use tensor::Tensor;
