use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("horizon: {0}")]
    Horizon(String),
    #[error("guard tripped: {0}")]
    Guard(String),
    #[error("step rejected: {0}")]
    StepRejected(String),
    #[error("hypothesis not satisfied: {what} (margin {margin:e})")]
    Hypothesis { what: String, margin: f64 },
    #[error("query outside table range: {0}")]
    Extrapolation(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Numeric(format!("{what}: non-finite value at node {i}"))),
        None => Ok(()),
    }
}
