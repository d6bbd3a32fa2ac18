use thiserror::Error;

use crate::{Instant, Node, Qubit};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("operand {qubit} out of range for a {num_qubits}-qubit circuit")]
    OperandOutOfRange { qubit: Qubit, num_qubits: usize },
    #[error("binary gate uses qubit {0} twice")]
    DuplicateBinaryOperand(Qubit),
    #[error("gate has {0} operands")]
    BadArity(usize),
    #[error("pair circuit needs two distinct qubits, got {0} twice")]
    SameQubit(Qubit),
    #[error("cut at odd instant {0}")]
    OddCut(Instant),
    #[error("cut {cut} outside (0, {horizon}) or repeated")]
    CutOutOfRange { cut: Instant, horizon: Instant },
    #[error("network is disconnected")]
    Disconnected,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("storage capacity short by {deficit} qubits")]
    InsufficientStorage { deficit: usize },
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("expected a two-qubit circuit, got {0} qubits")]
    NotTwoQubits(usize),
    #[error("gate at instant {0} cannot be covered by any migration")]
    Uncoverable(Instant),
    #[error("execution memory at node {node} cannot host the required copies")]
    IrreparableCapacity { node: Node },
    #[error("random generation exhausted after {0} attempts")]
    GenerationExhausted(usize),
    #[error("oracle limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
