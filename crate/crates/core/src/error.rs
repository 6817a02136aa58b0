use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid specification: {0}")]
    Spec(String),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("cannot flip labels with epsilon > 0 when only one category exists")]
    NoAlternative,

    #[error("cannot classify with an empty teaching set")]
    EmptyTeachingSet,

    #[error("coverage mismatch: {0}")]
    Coverage(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("curve has no populated buckets")]
    EmptyCurve,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("could not sample a teacher at alignment level {level} after {attempts} attempts")]
    Sampling { level: f64, attempts: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Range {
            what,
            value,
            lo: 0.0,
            hi: 1.0,
        })
    }
}
