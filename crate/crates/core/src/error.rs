use thiserror::Error;

/// Errors raised by `volterra-core`.
#[derive(Debug, Error)]
pub enum VolterraError {
    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("kernel memory {memory} exceeds grid length {length}")]
    Resolution { memory: usize, length: usize },

    #[error("index {index:?} lies outside the grid")]
    OutOfGrid { index: Vec<usize> },

    #[error("period {period} does not divide grid length {length}")]
    Aliasing { period: usize, length: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("internal consistency check failed: residual {residual:e}")]
    InternalConsistency { residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(String),

    #[error("syntax error at byte {offset}: expected one of {expected:?}")]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unbound name `{0}`")]
    UnboundName(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VolterraError>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(VolterraError::Contract(msg.into()))
}
