use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: asymmetric or non-normalized pmf, broken insertion path, bad parity.
    #[error("validation error{}: {reason}", site.as_ref().map(|s| format!(" at {s}")).unwrap_or_default())]
    Validation { site: Option<String>, reason: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    /// A window, cell budget or enumeration budget was exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("aliasing: torus size {size} must exceed {required}")]
    Aliasing { size: usize, required: usize },

    #[error("horizon {requested} exceeds available length {available}")]
    Horizon { requested: usize, available: usize },

    /// A checked invariant broke at runtime. Carries a diagnostic trace.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(reason: impl Into<String>) -> Self {
        Error::Validation { site: None, reason: reason.into() }
    }

    pub fn validation_at(site: impl std::fmt::Display, reason: impl Into<String>) -> Self {
        Error::Validation { site: Some(site.to_string()), reason: reason.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 1,
            Error::Resource(_) => 3,
            _ => 2,
        }
    }
}
