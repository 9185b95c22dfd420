use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    /// The state is outside the open Weyl chamber.
    #[error("domain error: {0}")]
    Domain(String),

    /// A spectrum that must be regular (simple, nonzero) is not.
    #[error("regularity violation: {0}")]
    Regularity(String),

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not in exp(p): {0}")]
    NotInExpP(String),

    #[error("structure violation: {0}")]
    Structure(String),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("singular Cauchy matrix: {0}")]
    SingularCauchy(String),

    #[error("invalid orbit vector: {0}")]
    InvalidOrbitVector(String),

    #[error("integration aborted at t = {last_t}: {reason}")]
    IntegrationAborted { last_t: f64, reason: String },

    /// The linear or exponential flow hits a spectral collision; `safe_t` is the
    /// largest time (same sign as the request) at which the flow is still regular.
    #[error("flow collision at t = {t}; largest safe time {safe_t}")]
    FlowCollision { t: f64, safe_t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
