use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("target is infeasible: population bound {margin:.4e} < 0 at t = {t_violation:.3} ps")]
    Infeasible { t_violation: f64, margin: f64 },

    #[error("sampled target is too noisy to differentiate (|d2 beta_c| dt^2 = {0:.3e})")]
    DerivativeNoise(f64),

    #[error("integration quality: norm defect {defect:.3e} exceeds {limit:.1e}; reduce the time step")]
    IntegrationQuality { defect: f64, limit: f64 },

    #[error("norm increased by {0:.3e} under non-Hermitian evolution")]
    NormIncrease(f64),

    #[error("density matrix lost positivity (eigenvalue {0:.3e})")]
    PositivityViolation(f64),

    #[error("phase drift is ill-defined: |<g,0|psi>| = {0:.4}")]
    PhaseUndefined(f64),

    #[error("cannot synthesise incoming wavepacket: {0}")]
    SourceSynthesis(String),

    #[error("schedule violation: {0}")]
    ScheduleViolation(String),
}
