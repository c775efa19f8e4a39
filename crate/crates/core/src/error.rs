use thiserror::Error;

/// Errors shared across the simulation modules.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("vector is not a member of {space}")]
    Membership { space: &'static str },

    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("state of {qubits} qubits exceeds the configured cap of {cap}")]
    QubitCap { qubits: usize, cap: usize },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("syndrome has no decodable error of weight <= {t}")]
    DecodeFailure { t: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("bad input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
