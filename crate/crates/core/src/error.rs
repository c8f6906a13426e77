use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimator `{name}` failed on bootstrap sample {sample}: {reason}")]
    EstimatorFailure {
        sample: usize,
        name: String,
        reason: String,
    },
    #[error("intensity fields are defined on different grids")]
    GridMismatch,

    #[error("pattern has {found} points, at least {required} required")]
    TooFewPoints { required: usize, found: usize },
    #[error("distance {r} exceeds the admissible range {max}")]
    RangeTooLarge { r: f64, max: f64 },
    #[error("distances must be strictly positive")]
    NonpositiveR,
    #[error("pattern is empty")]
    EmptyPattern,

    #[error("unknown Poisson intensity preset {0}")]
    UnknownPreset(u8),
    #[error("intensity is unbounded or not finite on the window")]
    UnboundedIntensity,
    #[error("DPP existence condition violated: alpha {alpha} > alpha_max {alpha_max}")]
    ExistenceViolated { alpha: f64, alpha_max: f64 },
    #[error("spectral truncation cannot reach tail mass {cap}")]
    TruncationTooCoarse { cap: f64 },

    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("no pairs of points within distance {r}")]
    NoPairs { r: f64 },
    #[error("likelihood does not depend on the parameters over the feasible set")]
    DegenerateLikelihood,
    #[error("random set saturates the window (area fraction {p_hat})")]
    Saturated { p_hat: f64 },

    #[error("{failed} of {total} replications failed: {first}")]
    StudyFailed {
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
