use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required column is absent from the input header or record schema.
    #[error("schema error: column `{column}` not found")]
    Schema { column: String },

    /// A data row could not be parsed. `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("cumulative electricity decreases at {}", .timestamps.join(", "))]
    Monotonicity { timestamps: Vec<String> },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("degenerate target `{0}`: target column is constant")]
    DegenerateTarget(String),

    #[error("no eligible features to select")]
    EmptySelection,

    #[error("singular leaf: hessian sum {hessian} + l2 penalty {l2} is not positive")]
    Singularity { hessian: f64, l2: f64 },

    #[error("unsupported model document version `{found}` (expected `{expected}`)")]
    Version { found: String, expected: String },

    #[error("malformed model document: {0}")]
    Malformed(String),

    #[error("truncated model document")]
    Truncated,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
