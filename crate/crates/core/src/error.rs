use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for a {n}-qubit register")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("control and target must differ (both are {0})")]
    SameQubit(usize),

    #[error("qubit {0} is addressed twice in one cycle")]
    QubitReused(usize),

    #[error("unsupported register size {n} (limit {limit})")]
    TooManyQubits { n: usize, limit: usize },

    #[error("invalid Pauli label {0:?}")]
    InvalidPauliLabel(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("u-gate index {0} out of range 1..=6")]
    UGateIndex(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no channel mapped for hard cycle {0} in strict mode")]
    UnmappedCycle(String),

    #[error("distribution dimension mismatch: expected {expected} bits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("confusion matrix for qubit {qubit} is not invertible (p00 + p11 = {sum})")]
    SingularConfusion { qubit: usize, sum: f64 },

    #[error("hard cycle {0} cannot be amplified: {1}")]
    NotAmplifiable(usize, String),

    #[error("observable undefined: {0}")]
    Undefined(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps the error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}
