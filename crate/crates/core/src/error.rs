use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("profile length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("right-hand side is not mean-zero (bracket = {residual:e})")]
    NotMeanZero { residual: f64 },

    #[error("invalid turning model: {0}")]
    InvalidModel(String),

    #[error("singular linear system (zero pivot at row {row})")]
    SingularSystem { row: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("grids do not nest under refinement: {0}")]
    NonNestingGrids(String),

    #[error("solution blew up at t = {t} (step {step})")]
    BlowUp { t: f64, step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(found: usize, expected: usize) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
