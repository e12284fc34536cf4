use thiserror::Error;

/// Errors raised by the toolkit. Verification outcomes (a failed
/// non-squeezing trial, an unsatisfied capacity condition) are report
/// content, never errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error(
        "matrix is not positive definite: eigenvalue {eigenvalue:e} is below the floor {floor:e}"
    )]
    NotPositiveDefinite { eigenvalue: f64, floor: f64 },

    #[error("matrix is not symplectic: residual {residual:e} exceeds {threshold:e}")]
    NotSymplectic { residual: f64, threshold: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("inconsistent certificate: inner radius {inner} exceeds outer radius {outer}")]
    InconsistentCertificate { inner: f64, outer: f64 },

    #[error("Lagrangian frame violates its invariants: {0}")]
    NotLagrangian(String),

    #[error("loop is not closed: endpoint planes differ by sin(angle) = {distance:e}")]
    NotClosed { distance: f64 },

    #[error("sampling too coarse: phase step still {step:.3} rad after {depth} refinements")]
    SamplingTooCoarse { step: f64, depth: usize },

    #[error("winding {raw} is not within 0.1 of an integer")]
    NonIntegerWinding { raw: f64 },

    #[error("invalid Maslov index {value} for cycle {cycle}; indices must be >= 1")]
    InvalidMaslov { cycle: usize, value: i64 },

    #[error("action Hamiltonian evaluation failed at actions {actions:?}: {message}")]
    Evaluation { actions: Vec<f64>, message: String },

    #[error("theorem hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("level set is not a compact orbit: {0}")]
    NonCompactOrbit(String),

    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<V> = std::result::Result<V, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
