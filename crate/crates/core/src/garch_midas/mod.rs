//! Two-covariate GARCH-MIDAS: daily variance `h * tau` with a GJR short-run
//! component and a beta-weighted MIDAS long-run component.

mod fit;
mod gjr;
mod model;
mod weights;

pub use fit::{
    extract_volatilities, fit, fit_data, fit_restricted, CovarianceKind, GarchMidasFit, GarchMidasSpec, MIN_PERIODS,
};
pub use gjr::{fit_gjr, gjr_neg_log_likelihood, GjrFit, GjrParams};
pub use model::{
    long_run_component, loglik_contributions, neg_log_likelihood, short_run_recursion, variance_paths,
    GarchMidasParams, LongRunForm, MidasData, VariancePaths,
};
pub use weights::{beta_weights, BetaWeights};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GarchMidasError {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("invalid beta-weight shape (w1 = {w1}, w2 = {w2}); both must be >= 1")]
    InvalidShape { w1: f64, w2: f64 },
    #[error("insufficient covariate history: need {needed} lags, have {got}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("long-run component not positive in period {period} (value {value})")]
    PositivityViolated { period: usize, value: f64 },
    #[error("short-run persistence {persistence} is not below one")]
    NonStationaryParams { persistence: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("optimiser did not converge")]
    NoConvergence,
    #[error("model has no converged fit")]
    NotFitted,
}

pub type Result<T> = std::result::Result<T, GarchMidasError>;
