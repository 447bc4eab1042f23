//! Pre-estimation diagnostics: unit roots, structural breaks, ARCH effects
//! and collinearity.

mod arch_lm;
mod breaks;
mod descriptive;
pub mod unit_root;
mod vif;

pub use arch_lm::{arch_lm, ArchLmResult};
pub use breaks::{bai_perron, BreakSelection, BreakTestResult};
pub use descriptive::{describe, Descriptives};
pub use unit_root::{
    adf_test, adf_test_with_breaks, critical_values, pp_test, Adf, CriticalValues, DeterministicTerms,
    PhillipsPerron, UnitRootResult, UnitRootTest,
};
pub use vif::vif;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("singular regression")]
    SingularRegression,
    #[error("trimming fraction {0} outside [0.05, 0.25]")]
    InvalidTrim(f64),
    #[error("column `{0}` is constant")]
    ConstantColumn(String),
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;
