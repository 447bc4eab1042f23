//! Named, seeded scenarios: each writes its data as dated series plus a
//! truth table, and is selected by name at runtime.

use nalgebra::DMatrix;

use super::generators::{
    ar1, mean_shift, random_walk, simulate_garch_midas, simulate_location_scale, simulate_location_shift,
    simulate_msr, weekday_calendar, white_noise,
};
use super::rng::stream;
use super::{Result, SimError};
use crate::garch_midas::{GarchMidasParams, LongRunForm};
use crate::markov::{MsrParams, TransitionCoefs, TransitionMatrix};
use crate::report::{num, Table};
use crate::series::TimeSeries;

/// Ground truth used by the GARCH-MIDAS recovery experiments.
pub fn garch_midas_truth() -> GarchMidasParams {
    GarchMidasParams {
        mu: 0.0,
        alpha: 0.05,
        gamma: 0.10,
        beta: 0.85,
        m: 0.1,
        theta1: -0.3,
        theta2: -0.2,
        w1_1: 1.0,
        w1_2: 1.0,
        w2_1: 3.0,
        w2_2: 3.0,
    }
}

/// Two-regime truth: regime 1 is the high-volatility regime.
pub fn msr_truth() -> MsrParams {
    let p = TransitionMatrix::from_rows(&[&[0.95, 0.05], &[0.10, 0.90]]).expect("valid matrix");
    MsrParams {
        beta: vec![vec![1.0, 0.5], vec![-1.0, 0.2]],
        phi: Vec::new(),
        sigma: vec![2.0, 0.5],
        transition: TransitionCoefs::from_matrix(&p, 0),
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub series: Vec<TimeSeries>,
    pub truth: Table,
}

pub trait Scenario: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn default_seed(&self) -> u64;
    fn generate(&self, seed: u64) -> Result<ScenarioOutput>;
}

fn series(name: &str, dates: Vec<chrono::NaiveDate>, values: Vec<f64>) -> Result<TimeSeries> {
    TimeSeries::daily(name, dates, values).map_err(|e| SimError::InvalidParams(e.to_string()))
}

fn truth_table(rows: &[(&str, f64)]) -> Table {
    let mut t = Table::new(["parameter", "value"]);
    for (k, v) in rows {
        t.push([k.to_string(), num(*v)]);
    }
    t
}

fn column(x: &DMatrix<f64>, c: usize) -> Vec<f64> {
    x.column(c).iter().copied().collect()
}

pub struct GarchMidasScenario {
    pub params: GarchMidasParams,
    pub k: usize,
    pub n_days: usize,
}

impl Scenario for GarchMidasScenario {
    fn name(&self) -> &'static str {
        "garch-midas"
    }

    fn description(&self) -> &'static str {
        "daily returns with two monthly AR(1) covariates and the true variance components"
    }

    fn default_seed(&self) -> u64 {
        1
    }

    fn generate(&self, seed: u64) -> Result<ScenarioOutput> {
        let sim = simulate_garch_midas(&self.params, self.k, LongRunForm::Log, self.n_days, seed)?;
        let p = &self.params;
        Ok(ScenarioOutput {
            series: vec![
                sim.returns.to_series().with_name("returns"),
                sim.x1.clone(),
                sim.x2.clone(),
                series("true_stv", sim.returns.dates.clone(), sim.stv.clone())?,
                TimeSeries::monthly("true_ltv", sim.data.periods.clone(), sim.ltv.clone())
                    .map_err(|e| SimError::InvalidParams(e.to_string()))?,
            ],
            truth: truth_table(&[
                ("mu", p.mu),
                ("alpha", p.alpha),
                ("gamma", p.gamma),
                ("beta", p.beta),
                ("m", p.m),
                ("theta1", p.theta1),
                ("theta2", p.theta2),
                ("w2_1", p.w2_1),
                ("w2_2", p.w2_2),
                ("K", self.k as f64),
            ]),
        })
    }
}

pub struct MsrScenario {
    pub params: MsrParams,
    pub t_len: usize,
}

impl Scenario for MsrScenario {
    fn name(&self) -> &'static str {
        "msr"
    }

    fn description(&self) -> &'static str {
        "two-regime switching regression with its true regime path"
    }

    fn default_seed(&self) -> u64 {
        2
    }

    fn generate(&self, seed: u64) -> Result<ScenarioOutput> {
        let sim = simulate_msr(&self.params, self.t_len, seed)?;
        let dates = weekday_calendar(self.t_len);
        let mut out = vec![series("y", dates.clone(), sim.data.y.clone())?];
        for c in 1..sim.data.x.ncols() {
            out.push(series(&format!("x{c}"), dates.clone(), column(&sim.data.x, c))?);
        }
        out.push(series("regime", dates, sim.regimes.iter().map(|r| (r + 1) as f64).collect())?);
        let p = self.params.transition_at(&[]);
        let mut rows = Vec::new();
        let names: Vec<String> = (0..self.params.regimes())
            .flat_map(|r| (0..self.params.beta[r].len()).map(move |k| format!("beta_{}[{k}]", r + 1)))
            .collect();
        let values: Vec<f64> = self.params.beta.iter().flatten().copied().collect();
        for (n, v) in names.iter().zip(&values) {
            rows.push((n.as_str(), *v));
        }
        let sig: Vec<String> = (1..=self.params.regimes()).map(|r| format!("sigma_{r}")).collect();
        for (n, v) in sig.iter().zip(&self.params.sigma) {
            rows.push((n.as_str(), *v));
        }
        let stay: Vec<String> = (1..=self.params.regimes()).map(|r| format!("p{r}{r}")).collect();
        for (i, n) in stay.iter().enumerate() {
            rows.push((n.as_str(), p.get(i, i)));
        }
        Ok(ScenarioOutput { series: out, truth: truth_table(&rows) })
    }
}

pub struct LocationShiftScenario {
    pub n: usize,
}

impl Scenario for LocationShiftScenario {
    fn name(&self) -> &'static str {
        "location-shift"
    }

    fn description(&self) -> &'static str {
        "y = 1 + x + e: every conditional quantile has slope 1"
    }

    fn default_seed(&self) -> u64 {
        3
    }

    fn generate(&self, seed: u64) -> Result<ScenarioOutput> {
        let (y, x) = simulate_location_shift(self.n, 1.0, 1.0, seed);
        let dates = weekday_calendar(self.n);
        Ok(ScenarioOutput {
            series: vec![series("y", dates.clone(), y)?, series("x", dates, column(&x, 1))?],
            truth: truth_table(&[("intercept", 1.0), ("slope", 1.0)]),
        })
    }
}

pub struct LocationScaleScenario {
    pub n: usize,
}

impl Scenario for LocationScaleScenario {
    fn name(&self) -> &'static str {
        "location-scale"
    }

    fn description(&self) -> &'static str {
        "y = x + x e with x in (1, 5): the slope at quantile tau is 1 + Phi^-1(tau)"
    }

    fn default_seed(&self) -> u64 {
        4
    }

    fn generate(&self, seed: u64) -> Result<ScenarioOutput> {
        let (y, x) = simulate_location_scale(self.n, seed);
        let dates = weekday_calendar(self.n);
        Ok(ScenarioOutput {
            series: vec![series("y", dates.clone(), y)?, series("x", dates, column(&x, 1))?],
            truth: truth_table(&[("intercept", 0.0), ("slope_at_median", 1.0)]),
        })
    }
}

/// Univariate generators for the diagnostics: random walk, white noise, mean shift.
pub struct UnivariateScenario {
    pub kind: Univariate,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Univariate {
    RandomWalk,
    WhiteNoise,
    MeanShift { break_at: usize },
}

impl Scenario for UnivariateScenario {
    fn name(&self) -> &'static str {
        match self.kind {
            Univariate::RandomWalk => "random-walk",
            Univariate::WhiteNoise => "white-noise",
            Univariate::MeanShift { .. } => "mean-shift",
        }
    }

    fn description(&self) -> &'static str {
        match self.kind {
            Univariate::RandomWalk => "driftless Gaussian random walk (unit-root null)",
            Univariate::WhiteNoise => "iid standard normal noise",
            Univariate::MeanShift { .. } => "unit-variance noise with one mean shift of size 1",
        }
    }

    fn default_seed(&self) -> u64 {
        5
    }

    fn generate(&self, seed: u64) -> Result<ScenarioOutput> {
        let mut rng = stream(seed, 0);
        let (values, truth) = match self.kind {
            Univariate::RandomWalk => (random_walk(self.n, &mut rng), truth_table(&[("unit_root", 1.0)])),
            Univariate::WhiteNoise => (white_noise(self.n, &mut rng), truth_table(&[("unit_root", 0.0)])),
            Univariate::MeanShift { break_at } => (
                mean_shift(self.n, break_at, 1.0, &mut rng),
                truth_table(&[("break_index", (break_at - 1) as f64), ("shift", 1.0)]),
            ),
        };
        Ok(ScenarioOutput { series: vec![series("y", weekday_calendar(self.n), values)?], truth })
    }
}

/// Complete pipeline fixture: price index, two monthly MIDAS covariates and
/// five daily stage-2 regressors.
pub struct PipelineFixture {
    pub n_days: usize,
}

impl Scenario for PipelineFixture {
    fn name(&self) -> &'static str {
        "pipeline-fixture"
    }

    fn description(&self) -> &'static str {
        "prices, two monthly covariates and five daily regressors for an end-to-end run"
    }

    fn default_seed(&self) -> u64 {
        6
    }

    fn generate(&self, seed: u64) -> Result<ScenarioOutput> {
        let sim = simulate_garch_midas(&garch_midas_truth(), 12, LongRunForm::Log, self.n_days, seed)?;
        // prices whose 100 * log differences are the simulated returns; the
        // first price sits on the preceding Friday
        let mut dates = vec![sim.returns.dates[0] - chrono::Duration::days(3)];
        dates.extend(&sim.returns.dates);
        let mut level = 100f64.ln();
        let mut prices = vec![100.0];
        for r in &sim.returns.returns {
            level += r / 100.0;
            prices.push(level.exp());
        }
        let mut out = vec![series("price", dates, prices)?, sim.x1.clone(), sim.x2.clone()];
        let mut rng = stream(seed, 1);
        for j in 1..=5 {
            let v = ar1(self.n_days, 0.95, &mut rng);
            out.push(series(&format!("r{j}"), sim.returns.dates.clone(), v)?);
        }
        Ok(ScenarioOutput { series: out, truth: truth_table(&[("n_days", self.n_days as f64)]) })
    }
}

/// Registered scenarios with their default sizes.
pub fn scenarios() -> Vec<Box<dyn Scenario>> {
    vec![
        Box::new(GarchMidasScenario { params: garch_midas_truth(), k: 12, n_days: 4000 }),
        Box::new(MsrScenario { params: msr_truth(), t_len: 2000 }),
        Box::new(LocationShiftScenario { n: 1000 }),
        Box::new(LocationScaleScenario { n: 5000 }),
        Box::new(UnivariateScenario { kind: Univariate::RandomWalk, n: 500 }),
        Box::new(UnivariateScenario { kind: Univariate::WhiteNoise, n: 500 }),
        Box::new(UnivariateScenario { kind: Univariate::MeanShift { break_at: 100 }, n: 200 }),
        Box::new(PipelineFixture { n_days: 4000 }),
    ]
}

pub fn scenario(name: &str) -> Option<Box<dyn Scenario>> {
    scenarios().into_iter().find(|s| s.name() == name)
}
