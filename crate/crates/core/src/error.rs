use thiserror::Error;

/// Errors produced by circuit construction, simulation and differentiation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitCountMismatch { left: usize, right: usize },

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("gate `{gate}` targets qubit {qubit} more than once")]
    DuplicateTarget { gate: String, qubit: usize },

    #[error("missing binding for symbol `{0}`")]
    MissingBinding(String),

    #[error("non-finite binding for symbol `{0}`")]
    NonFiniteBinding(String),

    #[error("matrix for gate `{0}` is not unitary")]
    NonUnitary(String),

    #[error("generator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("non-commuting terms in generator: {0}")]
    NonCommuting(String),

    #[error("generator of gate `{gate}` acts on qubit {qubit} outside its targets")]
    GeneratorOutsideTargets { gate: String, qubit: usize },

    #[error("gate `{gate}` acts on {arity} qubits; at most 2 are supported here")]
    GateTooWide { gate: String, arity: usize },

    #[error("{num_qubits} qubits exceeds the configured maximum of {max}")]
    QubitLimit { num_qubits: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unsupported by this differentiator: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
