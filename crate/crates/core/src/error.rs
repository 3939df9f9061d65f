use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoherenceError>;

#[derive(Debug, Error)]
pub enum CoherenceError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |a - a^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("trace is {trace}, expected {expected}")]
    BadTrace { trace: f64, expected: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("vectors are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("phase {index} has modulus {modulus}, expected 1")]
    NonUnitPhase { index: usize, modulus: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("state is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularState { min_eigenvalue: f64 },

    #[error("perturbation operator is zero")]
    ZeroPerturbation,

    #[error("qubit configuration is degenerate: {0}")]
    DegenerateQubitPair(&'static str),

    #[error("setup does not certify coherence: {0}")]
    NotCertifying(String),

    #[error("expected {expected} measured bases, found {found}")]
    BasisCount { expected: usize, found: usize },

    #[error("Vandermonde nodes coincide (min pairwise distance {min_distance:e})")]
    CoincidentNodes { min_distance: f64 },

    #[error("invalid probability table: {0}")]
    InvalidProbabilities(String),

    #[error("reconstruction is inconsistent with the configuration (Hermiticity mismatch {mismatch:e})")]
    ConfigMismatch { mismatch: f64 },

    #[error("shift z = 0 carries only diagonal sums; use the reference basis for diagonals")]
    ZeroShift,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CoherenceError {
    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            CoherenceError::DimensionMismatch { .. } => "dimension_mismatch",
            CoherenceError::NotHermitian { .. } => "not_hermitian",
            CoherenceError::NotSquare { .. } => "not_square",
            CoherenceError::NonFinite => "non_finite",
            CoherenceError::Empty(_) => "empty",
            CoherenceError::BadTrace { .. } => "bad_trace",
            CoherenceError::NotPositive { .. } => "not_positive",
            CoherenceError::NotOrthonormal { .. } => "not_orthonormal",
            CoherenceError::NonUnitPhase { .. } => "non_unit_phase",
            CoherenceError::InvalidParameter(_) => "invalid_parameter",
            CoherenceError::ModulusMismatch(..) => "modulus_mismatch",
            CoherenceError::SingularState { .. } => "singular_state",
            CoherenceError::ZeroPerturbation => "zero_perturbation",
            CoherenceError::DegenerateQubitPair(_) => "degenerate_qubit_pair",
            CoherenceError::NotCertifying(_) => "not_certifying",
            CoherenceError::BasisCount { .. } => "basis_count",
            CoherenceError::CoincidentNodes { .. } => "coincident_nodes",
            CoherenceError::InvalidProbabilities(_) => "invalid_probabilities",
            CoherenceError::ConfigMismatch { .. } => "config_mismatch",
            CoherenceError::ZeroShift => "zero_shift",
            CoherenceError::Io(_) => "io",
            CoherenceError::Json(_) => "json",
        }
    }
}
