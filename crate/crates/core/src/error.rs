use thiserror::Error;

pub type Result<T> = std::result::Result<T, FwError>;

/// Failure modes of the operator constructions.
///
/// Variants that signal a missing spectral gap are grouped by
/// [`FwError::is_gap_violation`] so front ends can map them to their own
/// exit status.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FwError {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("metric violation: {0}")]
    MetricViolation(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("broken pseudo-Hermiticity: eigenvalue imaginary part {imag:.3e} exceeds {bound:.3e}")]
    BrokenPseudoHermiticity { imag: f64, bound: f64 },

    #[error("ill-conditioned eigenbasis: condition number {0:.3e}")]
    IllConditionedEigenbasis(f64),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("spectral gap violation: min |eigenvalue| {min_abs:.3e} <= {threshold:.3e}{hint}")]
    SpectralGap {
        min_abs: f64,
        threshold: f64,
        hint: String,
    },

    #[error("adiabatic sign undefined: instantaneous gap closes at t = {t:.6}")]
    AdiabaticSignUndefined { t: f64 },

    #[error("not positive definite: smallest eigenvalue {min_eig:.3e}")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("eriksen denominator degenerate: smallest eigenvalue of 2+βλ+λβ is {min_eig:.3e}")]
    EriksenDenominatorDegenerate { min_eig: f64 },

    #[error("not a sign operator: ‖λ²−I‖ = {defect:.3e}")]
    NotASignOperator { defect: f64 },

    #[error("arcsin domain violation: eigenvalue {eig:.6} outside [-1, 1]")]
    ArcsinDomain { eig: f64 },

    #[error("truncation too small: mode {mode} needs nf >= {needed}, got {nf}")]
    TruncationTooSmall { mode: i32, needed: usize, nf: usize },
}

impl FwError {
    pub fn is_gap_violation(&self) -> bool {
        matches!(
            self,
            FwError::SpectralGap { .. } | FwError::AdiabaticSignUndefined { .. }
        )
    }
}
