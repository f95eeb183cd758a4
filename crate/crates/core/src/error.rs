use thiserror::Error;

/// Errors raised by estimators, data loaders and the study driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("design matrix is rank deficient (column `{column}` is collinear with earlier columns)")]
    RankDeficient { column: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("logistic regression diverged: |coefficient| exceeded {bound} (separation)")]
    Separation { bound: f64 },

    #[error("binary response contains a single class")]
    SingleClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error(
        "weak identification: |denominator|/n = {scaled:.3e} below threshold {threshold:.3e} \
         (mediator variance does not depend on exposure)"
    )]
    WeakIdentification {
        numerator: f64,
        denominator: f64,
        scaled: f64,
        threshold: f64,
    },

    #[error("moment system is singular (instrument columns are collinear)")]
    SingularMomentSystem,

    #[error("too many failures: {failed} of {total} {what} failed")]
    TooManyFailures {
        what: &'static str,
        failed: usize,
        total: usize,
    },

    #[error("empty cell: {0}")]
    EmptyCell(String),

    #[error("oracle estimator requires latent column(s): {0}")]
    MissingLatentColumns(String),

    #[error("missing column `{0}` in input header")]
    MissingColumn(String),

    #[error("all {0} rows were dropped by the complete-case policy")]
    AllRowsDropped(usize),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn is_weak_identification(&self) -> bool {
        matches!(self, Error::WeakIdentification { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
