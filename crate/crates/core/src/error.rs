use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate ({row}, {col}) outside {h}x{w} matrix")]
    OutOfBounds { row: i32, col: i32, h: usize, w: usize },

    #[error("invalid cell code {0}; expected one of -1, 0, 1, 2, 3")]
    InvalidCode(i64),

    #[error("invalid matrix dimensions {h}x{w}; both must be in 1..=1024")]
    InvalidDimensions { h: usize, w: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("contour generation failed after {retries} retries")]
    GenerationFailed { retries: usize },

    #[error("constraint `{constraint}` infeasible after {retries} retries")]
    Infeasible { constraint: &'static str, retries: usize },

    #[error("matrix has no entrance cell")]
    NoEntrance,

    #[error("cell ({row}, {col}) has code {found}, expected {expected}")]
    WrongCell { row: i32, col: i32, found: i8, expected: &'static str },

    #[error("environment already terminated")]
    Terminated,

    #[error("episode has not terminated")]
    NotTerminated,

    #[error("dimension mismatch in `{field}`: expected {expected}, found {found}")]
    DimensionMismatch { field: &'static str, expected: usize, found: usize },

    #[error("`{field}` mismatch: {detail}")]
    Inconsistent { field: &'static str, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
