//! Error type shared across the crate, with the CLI exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator spec mismatch: dimension {expected} vs {got}")]
    SpecMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quasi-energy description invalid: 2*eps/g = {ratio} >= 1 (requires kappa < g^2/2*Omega)")]
    InvalidRegime { ratio: f64 },

    #[error("matrix is not Hermitian: anti-Hermitian residue {residue:.3e}")]
    NonHermitian { residue: f64 },

    #[error("frame/parameter inconsistency: {0}")]
    FrameParams(String),

    #[error("degenerate Liouvillian null space: second-smallest singular value {sigma2:.3e} < 1e-10")]
    DegenerateSteadyState { sigma2: f64 },

    #[error("density matrix is not stationary: residual {residual:.3e}")]
    NotStationary { residual: f64 },

    #[error("integrator step-size failure: step {step:.3e} below minimum without meeting tolerance")]
    StepSizeFailure { step: f64 },

    #[error("correlation tail too large at tau_max: |C|/peak = {ratio:.3e} > 1e-6; raise tau_max")]
    InsufficientTail { ratio: f64 },

    #[error("resolvent singular at delta = {delta}: grid point coincides with an undamped Liouvillian eigenvalue")]
    SingularResolvent { delta: f64 },

    #[error("ambiguous eigenstate identification: two candidates with overlaps {first:.4} and {second:.4}")]
    AmbiguousState { first: f64, second: f64 },

    #[error("ambiguous peak classification for label {label}: candidates at delta = {first} and {second}")]
    AmbiguousPeak { label: char, first: f64, second: f64 },

    #[error("spectral methods disagree: max relative deviation {max_rel_dev:.3e} > 1e-2")]
    MethodMismatch { max_rel_dev: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("linear algebra backend failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 0 success, 2 config, 3 numerical, 4 ambiguity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::InvalidInput(_) => 2,
            Error::AmbiguousState { .. } | Error::AmbiguousPeak { .. } => 4,
            _ => 3,
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
