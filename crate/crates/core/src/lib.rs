//! Regime-aware volatility toolkit: GARCH-MIDAS decomposition, Markov-switching
//! and quantile regressions, pre-estimation diagnostics and simulation oracles.

pub mod diagnostics;
pub mod garch_midas;
pub mod linalg;
pub mod markov;
pub mod optim;
pub mod quantile;
pub mod report;
pub mod series;
pub mod simulation;
