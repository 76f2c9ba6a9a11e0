use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point kind {found} does not belong to a {expected} space")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("point index {index} out of range for a finite space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("vector point has dimension {found}, space expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid metric space: {0}")]
    InvalidSpace(String),

    #[error("measures live on different metric spaces")]
    SpaceMismatch,

    #[error("{points} support points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },

    #[error("weight {weight} at position {index} is negative or not finite")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("measure has empty support after dropping zero weights")]
    EmptySupport,

    #[error("weights sum to {sum}, expected 1 (pass renormalize to rescale)")]
    WeightSum { sum: f64 },

    #[error("operation requires a measure on the real line")]
    NotOneDimensional,

    #[error("point is outside the domain of the tabulated function")]
    OutsideDomain,

    #[error("function takes value {value} at the base point, expected 0")]
    NotNormalized { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transportation simplex hit the iteration cap ({iterations}); input is numerically degenerate")]
    IterationLimit { iterations: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("test function {index} is not 1-Lipschitz on the involved supports (slack {slack})")]
    UncertifiedTestFunction { index: usize, slack: f64 },

    #[error("certificate rejected: {0}")]
    CertificateRejected(String),

    #[error("no escaping index found within the horizon {horizon}")]
    HorizonInsufficient { horizon: usize },

    #[error("bracket is inconsistent: lower {lower} > upper {upper}")]
    BracketInconsistent { lower: f64, upper: f64 },

    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed or out-of-contract input, as
    /// opposed to internal failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::Infeasible | Error::Unbounded | Error::BracketInconsistent { .. }
        )
    }
}
