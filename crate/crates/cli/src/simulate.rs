//! `regimevol simulate`: writes a registered scenario to CSV files.

use std::path::{Path, PathBuf};

use regimevol_core::series::write_csv_to;
use regimevol_core::simulation::{scenario, scenarios, ScenarioOutput};

use crate::config::ConfigIssue;
use crate::CliError;

/// Names and descriptions of every registered scenario.
pub fn scenario_list() -> Vec<(&'static str, &'static str)> {
    scenarios().iter().map(|s| (s.name(), s.description())).collect()
}

/// Generates `name` into `out` and returns the files written.
pub fn simulate(name: &str, seed: Option<u64>, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let Some(sc) = scenario(name) else {
        let known: Vec<_> = scenario_list().into_iter().map(|(n, _)| n).collect();
        return Err(CliError::Config(vec![ConfigIssue {
            key: "--scenario".into(),
            message: format!("unknown scenario `{name}` (known: {})", known.join(", ")),
        }]));
    };
    let seed = seed.unwrap_or_else(|| sc.default_seed());
    let output = sc.generate(seed).map_err(|e| CliError::Stage { stage: "simulate".into(), message: e.to_string() })?;
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for s in &output.series {
        let path = out.join(format!("{}.csv", s.name()));
        let mut buf = Vec::new();
        write_csv_to(s, &mut buf).map_err(|e| CliError::Stage { stage: "simulate".into(), message: e.to_string() })?;
        std::fs::write(&path, buf)?;
        written.push(path);
    }
    let truth = out.join("truth.csv");
    std::fs::write(&truth, output.truth.to_csv_string())?;
    written.push(truth);
    if sc.name() == "pipeline-fixture" {
        let path = out.join("pipeline.toml");
        std::fs::write(&path, fixture_config(&output, seed))?;
        written.push(path);
    }
    Ok(written)
}

/// Ready-to-run config for the pipeline fixture, covering its whole sample.
fn fixture_config(output: &ScenarioOutput, seed: u64) -> String {
    let price = &output.series[0];
    let start = price.dates()[0];
    let end = *price.dates().last().expect("non-empty fixture");
    let mut text = format!(
        "seed = {seed}\noutput_dir = \"output\"\n\n[data]\nreturns = \"price.csv\"\nstart = \"{start}\"\nend = \"{end}\"\n\n\
         [garch_midas]\nk = 12\ncovariate1 = \"{c1}.csv\"\ncovariate1_name = \"{c1}\"\ncovariate1_transform = \"none\"\ncovariate2 = \"{c2}.csv\"\ncovariate2_name = \"{c2}\"\ncovariate2_transform = \"none\"\n\n[regressors]\n",
        c1 = output.series[1].name(),
        c2 = output.series[2].name(),
    );
    for s in &output.series[3..] {
        text.push_str(&format!("{0} = \"{0}.csv\"\n", s.name()));
    }
    text
}
