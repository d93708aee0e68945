use thiserror::Error;

/// Failures of the microscopic model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} out of domain: {value}")]
    Domain { quantity: &'static str, value: f64 },

    #[error(
        "population solve did not converge after {iterations} iterations \
         (last n_b = {last_n_b:e} cm^-3, relative residual {residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        last_n_b: f64,
        residual: f64,
    },

    #[error("probe grid invalid: {0}")]
    Grid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("signal and grid lengths differ ({signal} vs {grid})")]
    LengthMismatch { signal: usize, grid: usize },

    #[error("no doublet signature in the signal and no initial guess supplied")]
    NoDoubletSignature,

    #[error("both doublet amplitudes are zero; asymmetry undefined")]
    ZeroAmplitudes,

    #[error("rank-deficient regression input: {0}")]
    RankDeficient(&'static str),

    #[error("non-positive interval: {0}")]
    NonPositive(f64),

    #[error("all {0} sweep fits failed or were degenerate")]
    AllFitsFailed(usize),
}

/// A configuration problem, located by its key.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Top-level error used by scenario orchestration and the binary.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Analysis(#[from] AnalysisError),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),
}

impl Error {
    /// Process exit code: 2 config, 3 solver non-convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Model(ModelError::NoConvergence { .. }) => 3,
            Error::Model(_) => 2,
            Error::Analysis(_) => 3,
            Error::Parse { .. } | Error::Io { .. } | Error::Output(_) => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
