use thiserror::Error;

/// Errors raised by the numerical layer and the file formats built on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is invalid: need an even number of nodes, at least 8")]
    InvalidGrid(usize),

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Two nodes of the contour are (numerically) coincident, so the arc-chord
    /// quantity is unbounded.
    #[error("arc-chord violation at node {node}, offset {offset}: chord {chord:.3e} below {limit:.3e}")]
    ArcChord {
        node: usize,
        offset: usize,
        chord: f64,
        limit: f64,
    },

    #[error("parametrization speed degenerates at node {node}: |x'| = {speed:.3e}")]
    SpeedDegenerate { node: usize, speed: f64 },

    #[error("inverse reparametrization did not converge at node {node}")]
    NewtonFailed { node: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
