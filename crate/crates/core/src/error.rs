use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid domain: rho = {rho}, sigma = {sigma} (both must be positive)")]
    InvalidDomain { rho: f64, sigma: f64 },
    #[error("series is not real: coefficient at {index} differs from the conjugate of its partner by {defect:e}")]
    NotHermitian { index: String, defect: f64 },
    #[error("imaginary residue {residue:e} on evaluation; conjugate symmetry violated")]
    ImaginaryResidue { residue: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologicalError {
    #[error("zero divisor at k = {k}: k·omega = {divisor:e}")]
    ZeroDivisor { k: String, divisor: f64 },
    #[error("right-hand side has an angle average of size {size:e}; remove it first")]
    AverageNotRemoved { size: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizeError {
    #[error("step {step}: {source}")]
    Homological {
        step: usize,
        #[source]
        source: HomologicalError,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("step {step}: truncation loss {loss:e} exceeds the incoming residual {residual:e}")]
    TruncationOverflow { step: usize, loss: f64, residual: f64 },
    #[error("step {step}: Lie series did not converge within the order cap")]
    LieDivergence { step: usize },
    #[error("outer detuning iteration diverged after {passes} passes (updates {updates:?})")]
    OuterDiverged { passes: usize, updates: Vec<f64> },
    #[error("point left the analyticity domain at stage {stage}: |p| = {p_abs:e} > rho = {rho:e}")]
    OutOfDomain { stage: usize, p_abs: f64, rho: f64 },
    #[error("invalid run parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("schedule invalid: alpha^(tau+2) * eps0 = {ratio} >= 1, the geometric series diverges")]
    ScheduleInvalid { ratio: f64 },
    #[error("alpha = {0} must exceed 4, otherwise the domains 1 - 4/alpha^k collapse")]
    AlphaTooSmall(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(
        "integration step rejected at t = {time}: local error estimate {estimate:e} above tolerance {tolerance:e}"
    )]
    StepRejected { time: f64, estimate: f64, tolerance: f64 },
    #[error("invalid integration parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}
