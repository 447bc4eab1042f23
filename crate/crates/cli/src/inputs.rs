//! Loads every input file named in a validated config, before any stage runs.

use chrono::NaiveDate;
use regimevol_core::series::{
    load_csv, log_returns, month_from_key, month_key, CsvSchema, Frequency, ReturnSeries, TimeSeries,
};

use crate::config::{InputSeries, PipelineConfig, Transform};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Inputs {
    /// Daily percent log returns inside the configured date range.
    pub returns: ReturnSeries,
    /// Transformed monthly covariates with their full history, shifted by
    /// the publication lag.
    pub covariates: [TimeSeries; 2],
    /// Transformed daily stage-2 regressors inside the date range.
    pub regressors: Vec<TimeSeries>,
}

fn input_err(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{what}: {e}"))
}

fn transformed(input: &InputSeries, expected: Frequency) -> Result<TimeSeries, CliError> {
    let raw = load_csv(&input.path, CsvSchema::DateValue).map_err(|e| input_err(&input.name, e))?;
    if raw.frequency() != expected {
        return Err(CliError::Input(format!(
            "{}: expected a {expected} series in {}, found {}",
            input.name,
            input.path.display(),
            raw.frequency()
        )));
    }
    let out = match input.transform {
        Transform::None => Ok(raw),
        Transform::Diff => raw.diff(),
        Transform::LogDiff => raw.log_diff(),
    };
    Ok(out.map_err(|e| input_err(&input.name, e))?.with_name(input.name.clone()))
}

fn lagged(series: TimeSeries, months: u32) -> Result<TimeSeries, CliError> {
    if months == 0 {
        return Ok(series);
    }
    let dates: Vec<NaiveDate> =
        series.dates().iter().map(|d| month_from_key(month_key(*d) + months as i32)).collect();
    TimeSeries::monthly(series.name().to_string(), dates, series.values().to_vec())
        .map_err(|e| input_err(series.name(), e))
}

pub fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs, CliError> {
    let data = &cfg.data;
    let raw = load_csv(&data.returns, data.returns_format).map_err(|e| input_err("returns", e))?;
    let window = raw.slice_dates(Some(data.start), Some(data.end)).map_err(|e| input_err("returns", e))?;
    let returns = if data.returns_are_prices {
        log_returns(&window).map_err(|e| input_err("returns", e))?
    } else {
        ReturnSeries::new(window.dates().to_vec(), window.values().to_vec()).map_err(|e| input_err("returns", e))?
    };

    let [c1, c2] = &cfg.garch_midas.covariates;
    let lag = cfg.garch_midas.lag_months;
    let covariates =
        [lagged(transformed(c1, Frequency::Monthly)?, lag)?, lagged(transformed(c2, Frequency::Monthly)?, lag)?];

    let regressors = cfg
        .regressors
        .iter()
        .map(|r| {
            transformed(r, Frequency::Daily)?
                .slice_dates(Some(data.start), Some(data.end))
                .map_err(|e| input_err(&r.name, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Inputs { returns, covariates, regressors })
}
