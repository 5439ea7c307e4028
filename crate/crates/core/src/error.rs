use thiserror::Error;

/// Errors raised by state validation, numerical routines and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace} (expected 1)")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state vector norm is {norm} (expected 1)")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-regular metric: f(0) = 0 while eigenvalue {eigenvalue} is paired with a zero eigenvalue")]
    NonRegularMetric { eigenvalue: f64 },

    #[error("invalid operator-monotone function `{name}`: {reason}")]
    InvalidFunction { name: String, reason: String },

    #[error("effect `{label}` is not positive (min eigenvalue {min_eigenvalue:.3e})")]
    NegativeEffect { label: String, min_eigenvalue: f64 },

    #[error("effects do not sum to the identity (max deviation {deviation:.3e})")]
    IncompletePovm { deviation: f64 },

    #[error("measurements are not informationally complete: operators span {rank} of {required} dimensions")]
    RankDeficient { rank: usize, required: usize },

    #[error("no counts recorded")]
    EmptyCounts,

    #[error("maximally mixed input: purity {purity} does not exceed 1/d = {inverse_dim}")]
    MaximallyMixed { purity: f64, inverse_dim: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by bad inputs rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
