use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid thresholds: alpha {alpha} < beta {beta}")]
    InvalidThresholds { alpha: f64, beta: f64 },
    #[error("empty reduced memory")]
    EmptyMemory,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("measure cell ({i}, {j}) is outside the half-plane triangle")]
    CellOutsideTriangle { i: usize, j: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("codes too close: {0}")]
    CodesTooClose(String),
    #[error("invalid temperature {0}: must be positive")]
    InvalidTemperature(f64),
    #[error("invalid initial state {0}: must lie in [0, 1]")]
    InvalidInitialState(f64),
    #[error("symbol index {index} out of range 1..={k}")]
    SymbolOutOfRange { index: usize, k: usize },
    #[error("stack depth overflow (bound {0})")]
    DepthOverflow(usize),
    #[error("pop on empty stack")]
    EmptyStack,
    #[error("channel corrupted: {0}")]
    ChannelCorrupted(String),
    #[error("invalid PDA spec: {0}")]
    InvalidSpec(String),
    #[error("simulation diverged from the reference interpreter at step {step}: {detail}")]
    Divergence { step: usize, detail: String },
    #[error("step limit {0} exceeded")]
    StepLimit(usize),
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unsupported formula shape: {0}")]
    Unsupported(String),
    #[error("relaxation did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("not found")]
    NotFound,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
}

impl Error {
    /// True for I/O and parse failures (CLI exit code 2); everything else is a
    /// domain error (exit code 1).
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Csv(_)
                | Error::Json(_)
                | Error::Io(_)
                | Error::Parse { .. }
                | Error::Syntax { .. }
        )
    }
}
