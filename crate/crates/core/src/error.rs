use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unparseable numeric cell {value:?} at row {row}, column {column:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("duplicate year {0}")]
    DuplicateYear(i32),

    #[error("years must be strictly increasing (saw {prev} then {next})")]
    YearsNotIncreasing { prev: i32, next: i32 },

    #[error("unknown column or series {0:?}")]
    UnknownSeries(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: need {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("singular design matrix (collinear regressors)")]
    SingularDesign,

    #[error("observed information is not positive definite")]
    SingularInformation,

    #[error("optimizer did not converge after {0} iterations")]
    NonConvergence(usize),

    #[error("autoregressive coefficients {0:?} are not stationary")]
    NonStationary(Vec<f64>),

    #[error("candidate {candidate} is not nested in the wide model")]
    NotNested { candidate: String },

    #[error("fit failed at year {year}: {source}")]
    FitFailedAt {
        year: i32,
        #[source]
        source: Box<Error>,
    },

    #[error("missing value needed for {0}")]
    MissingValue(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
