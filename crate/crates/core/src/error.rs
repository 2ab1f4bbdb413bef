use thiserror::Error;

/// Errors raised by the numerical and modelling layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    ConvergenceFailure(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix data: {0}")]
    InvalidData(String),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("basis vectors are not orthonormal (Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid collapse scenario: {0}")]
    InvalidScenario(String),

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid ensemble weights: {0}")]
    WeightMismatch(String),

    #[error("selected collapse branch {0} has vanishing weight")]
    ZeroNormBranch(usize),

    #[error("component {index} of the state vanishes in the collapse basis")]
    ZeroComponent { index: usize },

    #[error("value {value} is outside the admissible range {range}")]
    OutOfRange { value: f64, range: String },

    #[error("state is proportional to a collapse basis vector")]
    BasisState,

    #[error("every state component falls below the reduction tolerance")]
    NullState,

    #[error("density matrix is rank deficient")]
    RankDeficient,

    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}
