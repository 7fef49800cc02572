use thiserror::Error;

/// Errors raised by field construction, analysis and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dyadic block j = {j} exceeds resolvable j_max = {j_max}")]
    BlockOutOfRange { j: i32, j_max: i32 },
    #[error("spectrum not supported in the required annulus (relative leakage {leakage:.3e})")]
    SpectrumSupport { leakage: f64 },
    #[error("cutoff radius too large for box: 2*lambda = {two_lambda} > L/4 = {limit}")]
    LambdaTooLarge { two_lambda: f64, limit: f64 },
    #[error("stale far-field accumulator: accumulated to t = {acc_time}, state at t = {t}")]
    StaleAccumulator { acc_time: f64, t: f64 },
    #[error("solver halted at t = {t}: {reason}")]
    SolverHalt { t: f64, reason: String },
    #[error("non-finite values produced by {0}")]
    NonFinite(&'static str),
    #[error("field file format: {0}")]
    Format(String),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
