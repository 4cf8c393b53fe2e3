use slicereg_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid job spec: {0}")]
    Validation(String),
    #[error("cannot parse job spec: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("non-finite value in output: {0}")]
    NonFinite(String),
}

impl CliError {
    /// 0 success, 1 i/o, 2 validation, 3 non-convergence or NaN, 4 pole or zero division.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Json(_) => 2,
            CliError::Io(_) | CliError::Csv(_) => 1,
            CliError::NonFinite(_) => 3,
            CliError::Core(e) => match e {
                CoreError::Param(_) | CoreError::Domain(_) => 2,
                CoreError::NonConvergence(_) | CoreError::Undecidable(_) => 3,
                CoreError::Pole { .. } | CoreError::ZeroDivision { .. } => 4,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}
