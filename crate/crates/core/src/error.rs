use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid Kraus family: residual {residual:e} exceeds tolerance {tol:e}")]
    InvalidKraus { residual: f64, tol: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("precision failure: {message} (achieved error bound {achieved:e})")]
    Precision { message: String, achieved: f64 },
    #[error("horizon exceeded: step {step} > horizon {horizon}")]
    Horizon { step: u64, horizon: u64 },
    #[error("rational fit failed: {0}")]
    Fit(String),
    #[error("base machine does not halt with certainty (halting mass {mass})")]
    NotHalting { mass: f64 },
    #[error("von Neumann extractor exhausted after {pairs} pairs")]
    Exhausted { pairs: u64 },
    #[error("unsupported in this numeric mode: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
