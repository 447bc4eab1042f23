//! Library side of the `regimevol` binary: config validation, the staged
//! pipeline, scenario export and the oracle self-check.

pub mod config;
pub mod inputs;
pub mod oracle;
pub mod pipeline;
pub mod plot;
pub mod simulate;
pub mod stages;

use config::ConfigIssue;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),
    #[error("input error: {0}")]
    Input(String),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    /// 1 for anything the user must fix in their inputs, 2 for failures
    /// during estimation or while writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 1,
            CliError::Stage { .. } | CliError::Io(_) => 2,
        }
    }
}
