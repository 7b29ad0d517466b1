use thiserror::Error;

/// Errors produced by every module of the crate.
///
/// The variants are grouped so that a front end can map them onto exit
/// codes: argument-like failures (`Argument`, `Domain`, `Geometry`,
/// `Precondition`, `Logic`, `Degenerate`, `Resolution`) versus resource-like
/// failures (`Resource`, `Overflow`, `Convergence`, `Io`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("logic error: {0}")]
    Logic(String),
    #[error("degenerate symbol: {0}")]
    Degenerate(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("no convergence after {iterations} iterations (best residual {best_residual:.3e}): {message}")]
    Convergence {
        iterations: usize,
        best_residual: f64,
        message: String,
    },
    #[error("empty interior: {0}")]
    EmptyInterior(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the caller's input rather than by limits
    /// of the machine or the numerics.
    pub fn is_argument_like(&self) -> bool {
        !matches!(
            self,
            Error::Resource(_) | Error::Overflow(_) | Error::Convergence { .. } | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
