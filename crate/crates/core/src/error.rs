use thiserror::Error;

/// Errors surfaced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("inconsistent device: pattern {pattern} is reachable from exactly one undiscriminated Bell state")]
    InconsistentDevice { pattern: String },

    #[error("inconsistent run: both PhiMinus and PsiMinus outcomes in one logical measurement")]
    InconsistentRun,

    #[error("photon count {n} exceeds the supported maximum of {max}")]
    ResourceBound { n: usize, max: usize },

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("no contraction: logical error rates diverge even at eta = {eta:e}")]
    NoContraction { eta: f64 },

    #[error("circuit parse error on line {line}: {msg}")]
    CircuitParse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
