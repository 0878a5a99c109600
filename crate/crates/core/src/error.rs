use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampler exceeded its retry budget.
    #[error("sampler error: {0}")]
    Sampler(String),

    /// An iterative optimisation produced a non-finite objective.
    #[error("optimisation error: {message}")]
    Optimization {
        message: String,
        /// Serialized diagnostic state (JSON), if any.
        state: Option<String>,
    },

    /// Invalid or missing experiment configuration.
    #[error("{}", format_fields(.0))]
    Config(Vec<FieldError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single field-level configuration problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn format_fields(errors: &[FieldError]) -> String {
    let parts: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
    format!("invalid configuration: {}", parts.join("; "))
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        domain(format!("{what} must be finite, got {x}"))
    }
}
