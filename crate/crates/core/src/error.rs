use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Subset enumeration would exceed the configured budget.
    #[error("enumeration budget exceeded: {required} subsets required, budget is {budget}")]
    Budget { required: u128, budget: u128 },

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("missing geometry quantity: {0}")]
    MissingGeometry(&'static str),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line() as usize);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            kind => Error::Csv {
                line,
                message: format!("{kind:?}"),
            },
        }
    }
}
