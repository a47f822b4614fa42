use thiserror::Error;

/// Library-wide error type.
///
/// Variants are grouped by the failure class the CLI maps to an exit code:
/// input problems (bad files, bad Taylor data, out-of-range requests),
/// geometry/hypothesis failures (rank-deficient Vandermonde blocks, singular
/// Wronskians), and numerical breakdowns (eigensolver budget exhausted,
/// complex roots where real ones were expected).
#[derive(Debug, Error)]
pub enum Error {
    #[error("combinatorial overflow: {0}")]
    Overflow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ambiguous smoothness: all supplied odd Taylor coefficients vanish and the kernel is not declared infinitely smooth")]
    AmbiguousSmoothness,

    #[error("no exact evaluator for kernel family {0}")]
    NoExactEvaluator(String),

    #[error("degree exceeds smoothness: requested derivative data of total order {requested} but the kernel is only C^{available} at the diagonal")]
    DegreeExceedsSmoothness { requested: usize, available: usize },

    #[error("duplicate point at rows {0} and {1}")]
    DuplicatePoints(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric: relative asymmetry {0:.3e} exceeds 1e-12")]
    NotSymmetric(f64),

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    EigNotConverged { sweeps: usize, residual: f64 },

    #[error("rank-deficient factor: {0}")]
    RankDeficient(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate main term: {0}")]
    DegenerateMainTerm(String),

    #[error("verification failure: {0}")]
    Verification(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
