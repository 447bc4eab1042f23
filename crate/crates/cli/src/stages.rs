//! Pipeline stages, selectable by name. Each stage reads the loaded inputs
//! plus whatever earlier stages left in the output directory.

use std::fmt::Display;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use regimevol_core::diagnostics::{adf_test_with_breaks, arch_lm, bai_perron, describe, unit_root, vif, BreakSelection, DeterministicTerms};
use regimevol_core::garch_midas::{self, extract_volatilities, GarchMidasSpec};
use regimevol_core::markov::{fit_msr, MsrData, MsrSpec};
use regimevol_core::quantile::{quantile_process, QrOptions};
use regimevol_core::report::{num, Table};
use regimevol_core::series::{align, load_csv, write_csv_to, CsvSchema, TimeSeries};

use crate::config::{LtvFrequency, PipelineConfig};
use crate::inputs::Inputs;
use crate::plot::{render, Line, Panel, XAxis};

pub struct StageContext<'a> {
    pub config: &'a PipelineConfig,
    pub inputs: &'a Inputs,
    pub out: &'a Path,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageError(pub String);

fn fail(e: impl Display) -> StageError {
    StageError(e.to_string())
}

impl StageContext<'_> {
    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), StageError> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|e| fail(format!("{}: {e}", path.display())))
    }

    fn write_table(&self, name: &str, table: &Table) -> Result<(), StageError> {
        self.write(name, table.to_csv_string())
    }

    fn write_series(&self, name: &str, series: &TimeSeries) -> Result<(), StageError> {
        let mut buf = Vec::new();
        write_csv_to(series, &mut buf).map_err(fail)?;
        self.write(name, buf)
    }

    /// `None` when an earlier stage has not produced the file.
    fn read_series(&self, name: &str) -> Result<Option<TimeSeries>, StageError> {
        let path = self.out.join(name);
        if !path.exists() {
            return Ok(None);
        }
        load_csv(&path, CsvSchema::DateValue).map(Some).map_err(|e| fail(format!("{}: {e}", path.display())))
    }
}

pub trait Stage: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, ctx: &StageContext) -> Result<(), StageError>;
}

/// Registered stages in execution order.
pub fn stages() -> Vec<Box<dyn Stage>> {
    vec![Box::new(GarchMidasStage), Box::new(DiagnosticsStage), Box::new(MsrStage), Box::new(QrStage)]
}

pub fn stage(name: &str) -> Option<Box<dyn Stage>> {
    stages().into_iter().find(|s| s.name() == name)
}

pub struct GarchMidasStage;

impl Stage for GarchMidasStage {
    fn name(&self) -> &'static str {
        "garch-midas"
    }

    fn description(&self) -> &'static str {
        "decompose return variance into short- and long-run components"
    }

    fn run(&self, ctx: &StageContext) -> Result<(), StageError> {
        let cfg = &ctx.config.garch_midas;
        let spec = GarchMidasSpec {
            k: cfg.k,
            long_run_form: cfg.form,
            covariate_names: [cfg.covariates[0].name.clone(), cfg.covariates[1].name.clone()],
            covariance: cfg.covariance,
            ..GarchMidasSpec::default()
        };
        let [x1, x2] = &ctx.inputs.covariates;
        let fit = garch_midas::fit(&ctx.inputs.returns, x1, x2, &spec).map_err(fail)?;
        if !fit.converged && !cfg.allow_unconverged {
            return Err(fail(
                "optimiser did not converge; set garch_midas.allow_unconverged = true to keep the estimates",
            ));
        }
        let (stv, ltv) = extract_volatilities(&fit, true).map_err(fail)?;
        let (stv, ltv) = (stv.with_name("stv"), ltv.with_name("ltv"));

        ctx.write_table("garch_midas_params.csv", &fit.param_table())?;
        let mut report = fit.report();
        if !fit.converged {
            report.push_str("\nWARNING: estimates come from an unconverged optimisation\n");
        }
        ctx.write("garch_midas_report.txt", report)?;
        ctx.write_series("stv.csv", &stv)?;
        ctx.write_series("ltv.csv", &ltv)?;
        ctx.write("stv.svg", render(&[Panel::dated("Short-run volatility component", stv.dates(), vec![line("stv", stv.values())])], 1))?;
        ctx.write("ltv.svg", render(&[Panel::dated("Long-run volatility component", ltv.dates(), vec![line("ltv", ltv.values())])], 1))?;
        Ok(())
    }
}

fn line(label: &str, ys: &[f64]) -> Line {
    Line { label: label.into(), ys: ys.to_vec() }
}

pub struct DiagnosticsStage;

const SKIPPED: &str = "skipped: run the garch-midas stage first";

impl Stage for DiagnosticsStage {
    fn name(&self) -> &'static str {
        "diagnostics"
    }

    fn description(&self) -> &'static str {
        "descriptives, unit roots, structural breaks, ARCH effects and collinearity"
    }

    fn run(&self, ctx: &StageContext) -> Result<(), StageError> {
        let cfg = &ctx.config.diagnostics;
        let inputs = ctx.inputs;
        let stv = ctx.read_series("stv.csv")?;
        let ltv = ctx.read_series("ltv.csv")?;

        let mut variables: Vec<(String, Vec<f64>)> = vec![("returns".into(), inputs.returns.returns.clone())];
        variables.extend(inputs.covariates.iter().map(|c| (c.name().to_string(), c.values().to_vec())));
        variables.extend(inputs.regressors.iter().map(|r| (r.name().to_string(), r.values().to_vec())));
        let volatility = [("stv", stv.as_ref()), ("ltv", ltv.as_ref())];
        for (name, s) in volatility {
            if let Some(s) = s {
                variables.push((name.into(), s.values().to_vec()));
            }
        }

        let mut desc = Table::new(["variable", "n", "mean", "std_dev", "min", "max", "skewness", "excess_kurtosis"]);
        for (name, xs) in &variables {
            let d = describe(xs);
            desc.push([
                name.clone(),
                d.n.to_string(),
                num(d.mean),
                num(d.std_dev),
                num(d.min),
                num(d.max),
                num(d.skewness),
                num(d.kurtosis),
            ]);
        }

        let mut roots =
            Table::new(["variable", "test", "statistic", "lags", "nobs", "cv_1pct", "cv_5pct", "cv_10pct", "reject_5pct", "note"]);
        for (name, xs) in &variables {
            for test in unit_root::registry() {
                match test.run(xs, DeterministicTerms::Constant) {
                    Ok(r) => roots.push([
                        name.clone(),
                        test.name().into(),
                        num(r.statistic),
                        r.lags_used.to_string(),
                        r.nobs.to_string(),
                        num(r.critical_values.one),
                        num(r.critical_values.five),
                        num(r.critical_values.ten),
                        r.reject_at_5pct.to_string(),
                        String::new(),
                    ]),
                    Err(e) => roots.push(
                        [name.clone(), test.name().into()]
                            .into_iter()
                            .chain(std::iter::repeat_n("NA".to_string(), 7))
                            .chain([e.to_string()]),
                    ),
                }
            }
        }

        let selection = match cfg.selection {
            BreakSelection::SequentialSupF { level, reps, .. } => {
                BreakSelection::SequentialSupF { level, reps, seed: ctx.seed }
            }
            other => other,
        };
        let mut breaks = Table::new(["variable", "breaks", "break_dates", "min_segment", "note"]);
        let mut arch = Table::new(["variable", "lags", "lm_statistic", "p_value", "note"]);
        let demeaned = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|v| v - m).collect::<Vec<_>>()
        };
        match arch_lm(&demeaned(&inputs.returns.returns), cfg.arch_lags) {
            Ok(r) => arch.push(["returns".into(), r.lags.to_string(), num(r.lm_statistic), num(r.p_value), String::new()]),
            Err(e) => arch.push(["returns".into(), cfg.arch_lags.to_string(), "NA".into(), "NA".into(), e.to_string()]),
        }
        for (name, s) in volatility {
            let Some(s) = s else {
                breaks.push([name, "NA", "", "NA", SKIPPED]);
                arch.push([name, "NA", "NA", "NA", SKIPPED]);
                continue;
            };
            match bai_perron(s.values(), None, cfg.max_breaks, cfg.trim, selection) {
                Ok(r) => {
                    let dates: Vec<String> = r.break_dates(s.dates()).iter().map(NaiveDate::to_string).collect();
                    breaks.push([name.into(), r.num_breaks.to_string(), dates.join(";"), r.min_segment.to_string(), String::new()]);
                    // unit-root test with level-shift dummies at the detected breaks
                    let lags = unit_root::default_max_lags(s.len());
                    match adf_test_with_breaks(s.values(), DeterministicTerms::Constant, lags, &r.break_indices) {
                        Ok(u) => roots.push([
                            name.to_string(),
                            "adf-breaks".into(),
                            num(u.statistic),
                            u.lags_used.to_string(),
                            u.nobs.to_string(),
                            num(u.critical_values.one),
                            num(u.critical_values.five),
                            num(u.critical_values.ten),
                            u.reject_at_5pct.to_string(),
                            format!("{} break dummies", r.num_breaks),
                        ]),
                        Err(e) => roots.push(
                            [name.to_string(), "adf-breaks".into()]
                                .into_iter()
                                .chain(std::iter::repeat_n("NA".to_string(), 7))
                                .chain([e.to_string()]),
                        ),
                    }
                }
                Err(e) => breaks.push([name.into(), "NA".into(), String::new(), "NA".into(), e.to_string()]),
            }
            match arch_lm(&demeaned(s.values()), cfg.arch_lags) {
                Ok(r) => arch.push([name.into(), r.lags.to_string(), num(r.lm_statistic), num(r.p_value), String::new()]),
                Err(e) => arch.push([name.into(), cfg.arch_lags.to_string(), "NA".into(), "NA".into(), e.to_string()]),
            }
        }

        let mut vifs = Table::new(["regressor", "vif"]);
        let mut vif_note = String::new();
        if inputs.regressors.len() >= 2 {
            let panel = align(&inputs.regressors, &[]).map_err(fail)?;
            let cols: Vec<(String, Vec<f64>)> = inputs
                .regressors
                .iter()
                .map(|r| (r.name().to_string(), panel.column(r.name()).expect("aligned column").to_vec()))
                .collect();
            match vif(&cols) {
                Ok(v) => v.into_iter().for_each(|(n, x)| vifs.push([n, num(x)])),
                Err(e) => vif_note = format!("VIF unavailable: {e}\n"),
            }
        } else {
            vif_note = "VIF needs at least two regressors\n".into();
        }

        ctx.write_table("diagnostics_descriptives.csv", &desc)?;
        ctx.write_table("diagnostics_unit_root.csv", &roots)?;
        ctx.write_table("diagnostics_breaks.csv", &breaks)?;
        ctx.write_table("diagnostics_arch_lm.csv", &arch)?;
        ctx.write_table("diagnostics_vif.csv", &vifs)?;
        let report = format!(
            "Descriptive statistics\n{}\nUnit-root tests (constant, 5% decisions)\n{}\nStructural breaks in the mean\n{}\nARCH-LM tests\n{}\nVariance inflation factors\n{}{}",
            desc.to_text(),
            roots.to_text(),
            breaks.to_text(),
            arch.to_text(),
            vifs.to_text(),
            vif_note
        );
        ctx.write("diagnostics_report.txt", report)?;
        Ok(())
    }
}

/// A stage-2 regression sample: a volatility component on the regressors.
struct Target {
    name: &'static str,
    dates: Vec<NaiveDate>,
    y: Vec<f64>,
    /// Design with a leading constant column.
    x: DMatrix<f64>,
    names: Vec<String>,
}

fn design(columns: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, columns.len() + 1, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] })
}

/// Pairs `y[t]` with regressors from `t - lag`.
fn with_lag(name: &'static str, dates: &[NaiveDate], y: &[f64], cols: &[Vec<f64>], names: Vec<String>, lag: usize) -> Result<Target, StageError> {
    let n = y.len();
    if n <= lag + 1 {
        return Err(fail(format!("{name}: {n} observations cannot support a regressor lag of {lag}")));
    }
    let cols: Vec<Vec<f64>> = cols.iter().map(|c| c[..n - lag].to_vec()).collect();
    Ok(Target { name, dates: dates[lag..].to_vec(), y: y[lag..].to_vec(), x: design(&cols, n - lag), names })
}

fn targets(ctx: &StageContext) -> Result<Vec<Target>, StageError> {
    let (Some(stv), Some(ltv)) = (ctx.read_series("stv.csv")?, ctx.read_series("ltv.csv")?) else {
        return Err(fail("stv.csv and ltv.csv are missing; run the garch-midas stage first"));
    };
    let regs = &ctx.inputs.regressors;
    let mut names = vec!["const".to_string()];
    names.extend(regs.iter().map(|r| r.name().to_string()));

    let mut daily = vec![stv.with_name("stv")];
    daily.extend(regs.iter().cloned());
    let panel = align(&daily, &[]).map_err(fail)?;
    let cols: Vec<Vec<f64>> = regs.iter().map(|r| panel.column(r.name()).expect("aligned").to_vec()).collect();
    let lag = ctx.config.regressor_lag;
    let stv_target = with_lag("stv", panel.daily_dates(), panel.column("stv").expect("aligned"), &cols, names.clone(), lag)?;

    let ltv = ltv.with_name("ltv");
    let ltv_target = match ctx.config.ltv_frequency {
        LtvFrequency::Monthly => {
            let monthly: Vec<TimeSeries> = regs.iter().map(|r| r.monthly_mean()).collect::<Result<_, _>>().map_err(fail)?;
            let mut dates = Vec::new();
            let mut y = Vec::new();
            let mut cols = vec![Vec::new(); monthly.len()];
            for (d, v) in ltv.dates().iter().zip(ltv.values()) {
                let found: Option<Vec<f64>> =
                    monthly.iter().map(|m| m.dates().binary_search(d).ok().map(|i| m.values()[i])).collect();
                if let Some(row) = found {
                    dates.push(*d);
                    y.push(*v);
                    cols.iter_mut().zip(row).for_each(|(c, x)| c.push(x));
                }
            }
            if dates.is_empty() {
                return Err(fail("no month has both the long-run component and every regressor"));
            }
            with_lag("ltv", &dates, &y, &cols, names, lag)?
        }
        LtvFrequency::Daily => {
            let regs_or_stv = if regs.is_empty() { std::slice::from_ref(&daily[0]) } else { regs.as_slice() };
            let panel = align(regs_or_stv, std::slice::from_ref(&ltv)).map_err(fail)?;
            let cols: Vec<Vec<f64>> = regs.iter().map(|r| panel.column(r.name()).expect("aligned").to_vec()).collect();
            with_lag("ltv", panel.daily_dates(), panel.column("ltv").expect("aligned"), &cols, names, lag)?
        }
    };
    Ok(vec![stv_target, ltv_target])
}

pub struct MsrStage;

impl Stage for MsrStage {
    fn name(&self) -> &'static str {
        "msr"
    }

    fn description(&self) -> &'static str {
        "Markov-switching regressions of each volatility component"
    }

    fn run(&self, ctx: &StageContext) -> Result<(), StageError> {
        let cfg = &ctx.config.msr;
        for t in targets(ctx)? {
            let spec = MsrSpec {
                regimes: cfg.regimes,
                switching: t.names.clone(),
                switching_variance: cfg.switching_variance,
                n_starts: cfg.starts,
                seed: ctx.seed,
                ..MsrSpec::default()
            };
            let data = MsrData::new(t.y.clone(), t.x.clone(), None, None).map_err(fail)?;
            let fit = fit_msr(&spec, &data).map_err(|e| fail(format!("{}: {e}", t.name)))?;
            let m = cfg.regimes;
            let mut probs = Table::new(
                std::iter::once("date".to_string())
                    .chain((1..=m).map(|r| format!("filtered_{r}")))
                    .chain((1..=m).map(|r| format!("smoothed_{r}"))),
            );
            for (i, d) in t.dates.iter().enumerate() {
                probs.push(
                    std::iter::once(d.to_string())
                        .chain((0..m).map(|r| num(fit.filtered[(i, r)])))
                        .chain((0..m).map(|r| num(fit.smoothed[(i, r)]))),
                );
            }
            let smoothed_high: Vec<f64> = fit.smoothed.column(0).iter().copied().collect();
            let svg = render(
                &[
                    Panel::dated(format!("{} (target)", t.name), &t.dates, vec![line(t.name, &t.y)]),
                    Panel::dated("Smoothed probability of the high-volatility regime", &t.dates, vec![line("regime 1", &smoothed_high)]),
                ],
                1,
            );
            let mut report = fit.report();
            if !fit.converged {
                report.push_str("\nWARNING: the best start did not meet the convergence tolerances\n");
            }
            ctx.write_table(&format!("msr_{}_coefficients.csv", t.name), &fit.coefficient_table())?;
            ctx.write_table(&format!("msr_{}_transition.csv", t.name), &fit.transition_table())?;
            ctx.write_table(&format!("msr_{}_durations.csv", t.name), &fit.durations_table())?;
            ctx.write_table(&format!("msr_{}_probabilities.csv", t.name), &probs)?;
            ctx.write(&format!("msr_{}_probabilities.svg", t.name), svg)?;
            ctx.write(&format!("msr_{}_report.txt", t.name), report)?;
        }
        Ok(())
    }
}

pub struct QrStage;

impl Stage for QrStage {
    fn name(&self) -> &'static str {
        "qr"
    }

    fn description(&self) -> &'static str {
        "quantile regressions of each volatility component over the quantile grid"
    }

    fn run(&self, ctx: &StageContext) -> Result<(), StageError> {
        let cfg = &ctx.config.qr;
        let options = QrOptions { bandwidth: cfg.bandwidth.clone(), kernel: cfg.kernel.clone(), ..QrOptions::default() };
        for t in targets(ctx)? {
            let process = quantile_process(&t.y, &t.x, &t.names, &cfg.taus, &options)
                .map_err(|e| fail(format!("{}: {e}", t.name)))?;
            if process.fits.iter().all(Result::is_err) {
                return Err(fail(format!("{}: every quantile fit failed", t.name)));
            }

            let mut wide = Table::new(
                std::iter::once("coefficient".to_string()).chain(cfg.taus.iter().map(|tau| format!("tau_{tau:.2}"))),
            );
            for (j, name) in t.names.iter().enumerate() {
                let cells = process.fits.iter().map(|f| match f {
                    Ok(f) => {
                        let se = f.std_errors().map_or(f64::NAN, |s| s[j]);
                        format!("{} ({})", num(f.beta[j]), num(se))
                    }
                    Err(_) => "failed".into(),
                });
                wide.push(std::iter::once(name.clone()).chain(cells));
            }
            wide.push(std::iter::once("pseudo_r2".to_string()).chain(
                process.fits.iter().map(|f| f.as_ref().ok().and_then(|f| f.pseudo_r2).map_or("NA".into(), num)),
            ));

            let mut report = format!(
                "Quantile regressions of {} ({} observations, {:.0}% pointwise bands)\n\n{}",
                t.name,
                t.y.len(),
                100.0 * process.band_level,
                wide.to_text()
            );
            report.push_str(&format!("\nquantile crossings  {}\n", process.crossings(&t.x)));
            for (tau, e) in process.failures() {
                report.push_str(&format!("tau = {tau:.2} failed: {e}\n"));
            }

            let panels: Vec<Panel> = (0..t.names.len())
                .map(|j| {
                    let path = process.path(j);
                    Panel {
                        title: t.names[j].clone(),
                        xs: path.iter().map(|p| p.tau).collect(),
                        axis: XAxis::Numeric,
                        lines: vec![Line { label: "estimate".into(), ys: path.iter().map(|p| p.estimate).collect() }],
                        band: Some((path.iter().map(|p| p.lower).collect(), path.iter().map(|p| p.upper).collect())),
                        reference: Some(0.0),
                    }
                })
                .collect();

            ctx.write_table(&format!("qr_{}_coefficients.csv", t.name), &process.long_table())?;
            ctx.write_table(&format!("qr_{}_table.csv", t.name), &wide)?;
            ctx.write(&format!("qr_{}_paths.svg", t.name), render(&panels, 3))?;
            ctx.write(&format!("qr_{}_report.txt", t.name), report)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_order_and_lookup() {
        let names: Vec<_> = stages().iter().map(|s| s.name()).collect();
        assert_eq!(names, ["garch-midas", "diagnostics", "msr", "qr"]);
        assert!(stage("qr").is_some() && stage("ols").is_none());
        assert!(stages().iter().all(|s| !s.description().is_empty()));
    }

    #[test]
    fn lag_pairs_response_with_earlier_regressors() {
        let d: Vec<NaiveDate> = (1..=4).map(|i| NaiveDate::from_ymd_opt(2020, 1, i).unwrap()).collect();
        let t = with_lag("stv", &d, &[1.0, 2.0, 3.0, 4.0], &[vec![10.0, 20.0, 30.0, 40.0]], vec!["const".into(), "r".into()], 1).unwrap();
        assert_eq!(t.y, [2.0, 3.0, 4.0]);
        assert_eq!(t.x.column(1).iter().copied().collect::<Vec<_>>(), [10.0, 20.0, 30.0]);
        assert_eq!(t.dates[0], d[1]);
        assert!(with_lag("stv", &d, &[1.0; 4], &[vec![0.0; 4]], vec![], 3).is_err());
    }

    #[test]
    fn design_has_leading_constant() {
        let x = design(&[vec![2.0, 3.0]], 2);
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 3.0]));
    }
}
