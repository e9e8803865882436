use thiserror::Error;

/// Errors raised anywhere in the engine.
///
/// The variants are grouped so callers (notably the binary) can map them to
/// exit codes: case and configuration problems are validation failures, the
/// rest are numerical.
#[derive(Debug, Error)]
pub enum Error {
    #[error("case schema error: {0}")]
    Schema(String),

    #[error("case validation failed: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("power flow did not converge after {iterations} iterations (mismatch history: {history:?})")]
    PowerFlowDiverged { iterations: usize, history: Vec<f64> },

    #[error("initialization failed at generator on bus {bus}: equilibrium residual {residual:e}")]
    Initialization { bus: u32, residual: f64 },

    #[error("network solve failed at t = {time:.4} s: {reason}")]
    NetworkSolve { time: f64, reason: String },

    #[error("non-finite state at t = {time:.4} s ({what})")]
    NonFinite { time: f64, what: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible placement sampling: {0}")]
    Infeasible(String),

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for input problems (bad case file, bad config) as opposed to
    /// numerical failures during a run.
    pub fn is_validation(&self) -> bool {
        if let Error::Stage { source, .. } = self {
            return source.is_validation();
        }
        matches!(
            self,
            Error::Schema(_) | Error::Validation(_) | Error::Config(_) | Error::Io { .. }
        )
    }
}

/// Tags an error with the study stage it came from.
pub fn at_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
    move |e| Error::Stage { stage, source: Box::new(e) }
}

pub type Result<T> = std::result::Result<T, Error>;
