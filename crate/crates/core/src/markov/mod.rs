//! Markov-switching regression with constant or logit-driven transitions.

mod filter;
mod msr;

pub use filter::{
    expected_durations, hamilton_filter_core, kim_smoother, transition_logit, FilterOutput, TransitionCoefs,
    TransitionMatrix,
};
pub use msr::{
    fit_msr, hamilton_filter, parameter_count, smoothed_probabilities, MsrData, MsrFit, MsrParams, MsrSpec,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarkovError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("invalid transition probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("every regime density underflows at t = {t}")]
    DegenerateDensity { t: usize },
    #[error("optimiser did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, MarkovError>;
