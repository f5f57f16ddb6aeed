use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid dimensions, radii, budgets or other caller-supplied parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// An evaluator overflowed, returned NaN, or an iterative routine failed to settle.
    #[error("numeric failure: {what} (at {location})")]
    Numeric { what: String, location: String },

    /// The restricted function vanishes identically on the chosen subspace.
    #[error("degenerate slice: {0}")]
    DegenerateSlice(String),

    /// Argument outside the domain of a function (e.g. r <= 0 for a proximate order).
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(what: impl Into<String>, location: impl Into<String>) -> Self {
        Error::Numeric {
            what: what.into(),
            location: location.into(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateSlice(_))
    }
}
