//! Data-generating processes and brute-force oracles for Monte Carlo checks.

mod generators;
mod oracle;
pub mod rng;
mod scenarios;

pub use generators::{
    ar1, garch11, mean_shift, random_walk, simulate_garch_midas, simulate_location_scale, simulate_location_shift,
    simulate_msr, weekday_calendar, white_noise, GarchMidasSim, MsrSim, COVARIATE_AR,
};
pub use oracle::{brute_force_qr, mc_critical_values};
pub use scenarios::{
    garch_midas_truth, msr_truth, scenario, scenarios, GarchMidasScenario, LocationScaleScenario,
    LocationShiftScenario, MsrScenario, PipelineFixture, Scenario, ScenarioOutput, Univariate, UnivariateScenario,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
    #[error("brute force is limited to n <= 9 and p <= 3 (got n = {n}, p = {p})")]
    TooLarge { n: usize, p: usize },
}

pub type Result<T> = std::result::Result<T, SimError>;
