use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("column {index} has zero variance")]
    ConstantColumn { index: usize },

    #[error(
        "design restricted to columns {subset:?} is numerically rank deficient (condition estimate {condition:.3e})"
    )]
    RankDeficient { subset: Vec<usize>, condition: f64 },

    #[error("cannot estimate the noise variance from the full model: {0}")]
    Sigma2Unavailable(String),

    #[error("noise variance must be positive, got {0}")]
    NonPositiveSigma2(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("index {index} out of range for {len} covariates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
