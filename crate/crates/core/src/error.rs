use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("unknown edge label `{0}`")]
    UnknownLabel(String),

    #[error("word repeats letter `{label}` at position {position}")]
    RepeatedLetter { label: String, position: usize },

    #[error("empty word")]
    EmptyWord,

    #[error("zero-length segment")]
    ZeroLengthSegment,

    #[error("ray is parallel to the edge")]
    ParallelRay,

    #[error("ray escaped the table from ({x}, {y})")]
    Escaped { x: f64, y: f64 },

    #[error("word `{0}` is not realizable on this table")]
    Infeasible(String),

    #[error("corridor solver failed for `{word}`: {reason}")]
    Solver { word: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent answers: {0}")]
    Inconsistent(String),

    #[error("search budget exhausted after {explored} candidate chains")]
    BudgetExhausted { explored: usize },

    #[error("rejection sampling failed {0} times in a row")]
    SamplingFailed(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
