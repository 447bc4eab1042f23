//! Pipeline configuration: a TOML file of sections with flat keys.
//!
//! Validation walks the parsed table by hand so that every problem in the
//! file is reported in one pass, unknown keys included.

use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use regimevol_core::diagnostics::BreakSelection;
use regimevol_core::garch_midas::{CovarianceKind, LongRunForm};
use regimevol_core::quantile::{bandwidth_rule, default_taus, kernel};
use regimevol_core::series::CsvSchema;
use toml::{Table, Value};

/// One validation problem, keyed by its dotted config path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    None,
    Diff,
    LogDiff,
}

impl Transform {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "none" | "level" | "levels" => Some(Self::None),
            "diff" => Some(Self::Diff),
            "log-diff" => Some(Self::LogDiff),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSeries {
    pub name: String,
    pub path: PathBuf,
    pub transform: Transform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtvFrequency {
    Monthly,
    Daily,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub returns: PathBuf,
    pub returns_format: CsvSchema,
    /// When true the file holds prices and percent log returns are derived.
    pub returns_are_prices: bool,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MidasConfig {
    pub k: usize,
    pub form: LongRunForm,
    pub covariates: [InputSeries; 2],
    pub lag_months: u32,
    pub covariance: CovarianceKind,
    pub allow_unconverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub max_breaks: usize,
    pub trim: f64,
    pub arch_lags: usize,
    pub selection: BreakSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsrConfig {
    pub regimes: usize,
    pub switching_variance: bool,
    pub starts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrConfig {
    pub taus: Vec<f64>,
    pub bandwidth: String,
    pub kernel: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub path: PathBuf,
    /// Raw file contents, hashed into the run manifest.
    pub text: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub garch_midas: MidasConfig,
    pub regressors: Vec<InputSeries>,
    pub diagnostics: DiagnosticsConfig,
    pub msr: MsrConfig,
    pub qr: QrConfig,
    pub ltv_frequency: LtvFrequency,
    /// Stage-2 regressors enter with this many periods of delay (0 = contemporaneous).
    pub regressor_lag: usize,
}

pub const DEFAULT_START: &str = "2007-11-21";
pub const DEFAULT_END: &str = "2023-12-31";

/// Reads and validates a config file, reporting every issue found.
pub fn validate_config(path: &Path) -> Result<PipelineConfig, Vec<ConfigIssue>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![ConfigIssue { key: "<file>".into(), message: format!("{}: {e}", path.display()) }])?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base, path)
}

/// Validates config text; relative paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path, path: &Path) -> Result<PipelineConfig, Vec<ConfigIssue>> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| vec![ConfigIssue { key: "<syntax>".into(), message: e.message().to_string() }])?;
    let mut v = Validator { issues: Vec::new(), base: base.to_path_buf() };

    v.unknown_keys(&root, "", &["seed", "output_dir", "data", "garch_midas", "regressors", "diagnostics", "msr", "qr", "stage2"]);
    let seed = v.integer(Some(&root), "", "seed").map_or(1, |s| {
        if s < 0 {
            v.issue("seed", "must be non-negative");
        }
        s as u64
    });
    let output_dir = v.string(Some(&root), "", "output_dir").map_or_else(|| base.join("output"), |s| base.join(s));

    // [data]
    let data = v.section(&root, "data", true);
    v.unknown_keys_opt(data, "data", &["returns", "returns_format", "returns_are_prices", "start", "end"]);
    let returns = v.path(data, "data", "returns", true);
    let returns_format = match v.string(data, "data", "returns_format").as_deref() {
        None | Some("date-value") => CsvSchema::DateValue,
        Some("yahoo") => CsvSchema::YahooOhlc,
        Some(other) => {
            v.issue("data.returns_format", &format!("unknown format `{other}` (expected date-value or yahoo)"));
            CsvSchema::DateValue
        }
    };
    let returns_are_prices = v.boolean(data, "data", "returns_are_prices").unwrap_or(true);
    let start = v.date(data, "data", "start").unwrap_or_else(|| NaiveDate::parse_from_str(DEFAULT_START, "%Y-%m-%d").expect("valid default"));
    let end = v.date(data, "data", "end").unwrap_or_else(|| NaiveDate::parse_from_str(DEFAULT_END, "%Y-%m-%d").expect("valid default"));
    if end <= start {
        v.issue("data.end", &format!("date range is empty: end {end} is not after start {start}"));
    }

    // [garch_midas]
    let gm = v.section(&root, "garch_midas", true);
    v.unknown_keys_opt(
        gm,
        "garch_midas",
        &[
            "k", "form", "covariate1", "covariate1_name", "covariate1_transform", "covariate2", "covariate2_name",
            "covariate2_transform", "lag_months", "covariance", "allow_unconverged",
        ],
    );
    let k = v.integer(gm, "garch_midas", "k").unwrap_or(12);
    if k < 1 {
        v.issue("garch_midas.k", "K must be >= 1");
    }
    let form = match v.string(gm, "garch_midas", "form").as_deref() {
        None | Some("log") => LongRunForm::Log,
        Some("level") => LongRunForm::Level,
        Some(other) => {
            v.issue("garch_midas.form", &format!("unknown long-run form `{other}` (expected log or level)"));
            LongRunForm::Log
        }
    };
    let covariate = |v: &mut Validator, i: usize| {
        let key = format!("covariate{i}");
        let path = v.path(gm, "garch_midas", &key, true);
        let name = v.string(gm, "garch_midas", &format!("{key}_name")).unwrap_or_else(|| format!("x{i}"));
        // industrial production (first) enters in log-differences, financial
        // conditions (second) in levels
        let default = if i == 1 { Transform::LogDiff } else { Transform::None };
        let transform = match v.string(gm, "garch_midas", &format!("{key}_transform")) {
            None => default,
            Some(s) => Transform::parse(&s).unwrap_or_else(|| {
                v.issue(&format!("garch_midas.{key}_transform"), &format!("unknown transform `{s}` (none, diff, log-diff)"));
                Transform::None
            }),
        };
        InputSeries { name, path, transform }
    };
    let c1 = covariate(&mut v, 1);
    let c2 = covariate(&mut v, 2);
    if c1.name == c2.name {
        v.issue("garch_midas.covariate2_name", "covariate names must differ");
    }
    let lag_months = v.integer(gm, "garch_midas", "lag_months").unwrap_or(0);
    if lag_months < 0 {
        v.issue("garch_midas.lag_months", "must be non-negative");
    }
    let covariance = match v.string(gm, "garch_midas", "covariance").as_deref() {
        None | Some("hessian") => CovarianceKind::Hessian,
        Some("sandwich") => CovarianceKind::Sandwich,
        Some(other) => {
            v.issue("garch_midas.covariance", &format!("unknown covariance `{other}` (hessian or sandwich)"));
            CovarianceKind::Hessian
        }
    };
    let allow_unconverged = v.boolean(gm, "garch_midas", "allow_unconverged").unwrap_or(false);

    // [regressors]: name = path, in file order
    let mut regressors = Vec::new();
    match v.section(&root, "regressors", true) {
        Some(t) if t.is_empty() => v.issue("regressors", "at least one stage-2 regressor is required"),
        Some(t) => {
            for (name, value) in t {
                match value.as_str() {
                    Some(p) => {
                        let path = v.base.join(p);
                        if !path.is_file() {
                            v.issue(&format!("regressors.{name}"), &format!("file not found: {}", path.display()));
                        }
                        regressors.push(InputSeries { name: name.clone(), path, transform: Transform::None });
                    }
                    None => v.issue(&format!("regressors.{name}"), "expected a file path string"),
                }
            }
        }
        None => {}
    }
    for r in &regressors {
        if r.name == "const" {
            v.issue("regressors.const", "`const` is reserved for the intercept");
        }
    }

    // [diagnostics]
    let dg = v.section(&root, "diagnostics", false);
    v.unknown_keys_opt(dg, "diagnostics", &["max_breaks", "trim", "arch_lags", "selection", "supf_level", "supf_reps"]);
    let max_breaks = v.integer(dg, "diagnostics", "max_breaks").unwrap_or(5);
    if max_breaks < 0 {
        v.issue("diagnostics.max_breaks", "must be non-negative");
    }
    let trim = v.float(dg, "diagnostics", "trim").unwrap_or(0.15);
    if !(0.05..=0.25).contains(&trim) {
        v.issue("diagnostics.trim", "trimming fraction must lie in [0.05, 0.25]");
    }
    let arch_lags = v.integer(dg, "diagnostics", "arch_lags").unwrap_or(5);
    if arch_lags < 1 {
        v.issue("diagnostics.arch_lags", "must be >= 1");
    }
    let selection = match v.string(dg, "diagnostics", "selection").as_deref() {
        None | Some("bic") => BreakSelection::Bic,
        Some("sup-f") => {
            let level = v.float(dg, "diagnostics", "supf_level").unwrap_or(0.05);
            let reps = v.integer(dg, "diagnostics", "supf_reps").unwrap_or(1000);
            if !(level > 0.0 && level < 1.0) {
                v.issue("diagnostics.supf_level", "must lie in (0, 1)");
            }
            if reps < 100 {
                v.issue("diagnostics.supf_reps", "need at least 100 replications");
            }
            BreakSelection::SequentialSupF { level, reps: reps.max(0) as usize, seed }
        }
        Some(other) => {
            v.issue("diagnostics.selection", &format!("unknown rule `{other}` (bic or sup-f)"));
            BreakSelection::Bic
        }
    };

    // [msr]
    let ms = v.section(&root, "msr", false);
    v.unknown_keys_opt(ms, "msr", &["regimes", "switching_variance", "starts"]);
    let regimes = v.integer(ms, "msr", "regimes").unwrap_or(2);
    if !(2..=4).contains(&regimes) {
        v.issue("msr.regimes", "regime count must be between 2 and 4");
    }
    let switching_variance = v.boolean(ms, "msr", "switching_variance").unwrap_or(true);
    let starts = v.integer(ms, "msr", "starts").unwrap_or(8);
    if starts < 1 {
        v.issue("msr.starts", "must be >= 1");
    }

    // [qr]
    let q = v.section(&root, "qr", false);
    v.unknown_keys_opt(q, "qr", &["taus", "bandwidth", "kernel"]);
    let taus = v.float_array(q, "qr", "taus").unwrap_or_else(default_taus);
    if taus.is_empty() {
        v.issue("qr.taus", "quantile grid is empty");
    } else if taus.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        v.issue("qr.taus", "every quantile must lie in (0, 1)");
    } else if taus.windows(2).any(|w| w[1] <= w[0]) {
        v.issue("qr.taus", "quantiles must be strictly increasing");
    }
    let bandwidth = v.string(q, "qr", "bandwidth").unwrap_or_else(|| "hall-sheather".into());
    if bandwidth_rule(&bandwidth).is_none() {
        v.issue("qr.bandwidth", &format!("unknown bandwidth rule `{bandwidth}`"));
    }
    let kernel_name = v.string(q, "qr", "kernel").unwrap_or_else(|| "gaussian".into());
    if kernel(&kernel_name).is_none() {
        v.issue("qr.kernel", &format!("unknown kernel `{kernel_name}`"));
    }

    // [stage2]
    let s2 = v.section(&root, "stage2", false);
    v.unknown_keys_opt(s2, "stage2", &["ltv_frequency", "regressor_lag"]);
    let regressor_lag = v.integer(s2, "stage2", "regressor_lag").unwrap_or(0);
    if regressor_lag < 0 {
        v.issue("stage2.regressor_lag", "must be non-negative");
    }
    let ltv_frequency = match v.string(s2, "stage2", "ltv_frequency").as_deref() {
        None | Some("monthly") => LtvFrequency::Monthly,
        Some("daily") => LtvFrequency::Daily,
        Some(other) => {
            v.issue("stage2.ltv_frequency", &format!("unknown frequency `{other}` (monthly or daily)"));
            LtvFrequency::Monthly
        }
    };

    if !v.issues.is_empty() {
        return Err(v.issues);
    }
    let [c1, c2] = [c1, c2];
    Ok(PipelineConfig {
        path: path.to_path_buf(),
        text: text.to_string(),
        seed,
        output_dir,
        data: DataConfig { returns, returns_format, returns_are_prices, start, end },
        garch_midas: MidasConfig {
            k: k as usize,
            form,
            covariates: [c1, c2],
            lag_months: lag_months as u32,
            covariance,
            allow_unconverged,
        },
        regressors,
        diagnostics: DiagnosticsConfig { max_breaks: max_breaks as usize, trim, arch_lags: arch_lags as usize, selection },
        msr: MsrConfig { regimes: regimes as usize, switching_variance, starts: starts as usize },
        qr: QrConfig { taus, bandwidth, kernel: kernel_name },
        ltv_frequency,
        regressor_lag: regressor_lag.max(0) as usize,
    })
}

struct Validator {
    issues: Vec<ConfigIssue>,
    base: PathBuf,
}

fn dotted(section: &str, key: &str) -> String {
    if section.is_empty() { key.to_string() } else { format!("{section}.{key}") }
}

impl Validator {
    fn issue(&mut self, key: &str, message: &str) {
        self.issues.push(ConfigIssue { key: key.to_string(), message: message.to_string() });
    }

    fn section<'a>(&mut self, root: &'a Table, name: &str, required: bool) -> Option<&'a Table> {
        match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.issue(name, "expected a section");
                None
            }
            None => {
                if required {
                    self.issue(name, "missing section");
                }
                None
            }
        }
    }

    fn unknown_keys(&mut self, table: &Table, section: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                self.issue(&dotted(section, key), "unknown key");
            }
        }
    }

    fn unknown_keys_opt(&mut self, table: Option<&Table>, section: &str, known: &[&str]) {
        if let Some(t) = table {
            self.unknown_keys(t, section, known);
        }
    }

    fn string(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<String> {
        match t?.get(key)? {
            Value::String(s) => Some(s.clone()),
            _ => {
                self.issue(&dotted(section, key), "expected a string");
                None
            }
        }
    }

    fn integer(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<i64> {
        match t?.get(key)? {
            Value::Integer(i) => Some(*i),
            _ => {
                self.issue(&dotted(section, key), "expected an integer");
                None
            }
        }
    }

    fn float(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.issue(&dotted(section, key), "expected a number");
                None
            }
        }
    }

    fn boolean(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<bool> {
        match t?.get(key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.issue(&dotted(section, key), "expected true or false");
                None
            }
        }
    }

    fn float_array(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<Vec<f64>> {
        let value = t?.get(key)?;
        let parsed = value.as_array().and_then(|a| {
            a.iter()
                .map(|x| match x {
                    Value::Float(f) => Some(*f),
                    Value::Integer(i) => Some(*i as f64),
                    _ => None,
                })
                .collect::<Option<Vec<f64>>>()
        });
        if parsed.is_none() {
            self.issue(&dotted(section, key), "expected an array of numbers");
        }
        parsed
    }

    fn date(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<NaiveDate> {
        let raw = match t?.get(key)? {
            Value::String(s) => s.clone(),
            Value::Datetime(d) => d.to_string(),
            _ => {
                self.issue(&dotted(section, key), "expected a date (YYYY-MM-DD)");
                return None;
            }
        };
        let parsed = NaiveDate::parse_from_str(&raw, "%Y-%m-%d").ok();
        if parsed.is_none() {
            self.issue(&dotted(section, key), &format!("`{raw}` is not a YYYY-MM-DD date"));
        }
        parsed
    }

    /// A file path that must exist. Missing required keys are issues too.
    fn path(&mut self, t: Option<&Table>, section: &str, key: &str, required: bool) -> PathBuf {
        match self.string(t, section, key) {
            Some(p) => {
                let path = self.base.join(p);
                if !path.is_file() {
                    self.issue(&dotted(section, key), &format!("file not found: {}", path.display()));
                }
                path
            }
            None => {
                if required && t.is_some_and(|t| !t.contains_key(key)) {
                    self.issue(&dotted(section, key), "missing required key");
                }
                PathBuf::new()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for f in ["p.csv", "a.csv", "b.csv", "r1.csv"] {
            std::fs::write(dir.path().join(f), "date,value\n").unwrap();
        }
        dir
    }

    const MINIMAL: &str = r#"
[data]
returns = "p.csv"

[garch_midas]
covariate1 = "a.csv"
covariate2 = "b.csv"

[regressors]
r1 = "r1.csv"
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = fixture_dir();
        let c = parse_config(MINIMAL, dir.path(), &dir.path().join("c.toml")).unwrap();
        assert_eq!(c.garch_midas.k, 12);
        assert_eq!(c.msr.regimes, 2);
        assert_eq!(c.qr.taus, default_taus());
        assert_eq!(c.data.start.to_string(), DEFAULT_START);
        assert_eq!(c.ltv_frequency, LtvFrequency::Monthly);
        assert_eq!(c.regressors[0].name, "r1");
        assert_eq!(c.regressor_lag, 0);
        assert_eq!(c.garch_midas.covariates[0].transform, Transform::LogDiff);
        assert_eq!(c.garch_midas.covariates[1].transform, Transform::None);
    }

    #[test]
    fn every_problem_is_reported() {
        let dir = fixture_dir();
        let text = MINIMAL.replace("returns = \"p.csv\"", "returns = \"p.csv\"\nstart = \"2020-01-01\"\nend = \"2019-01-01\"")
            .replace("[garch_midas]", "[garch_midas]\nk = 0\nbogus = 1")
            .replace("r1 = \"r1.csv\"", "r1 = \"r1.csv\"\nr2 = \"missing.csv\"");
        let issues = parse_config(&text, dir.path(), Path::new("c.toml")).unwrap_err();
        let keys: Vec<&str> = issues.iter().map(|i| i.key.as_str()).collect();
        assert!(keys.contains(&"data.end"));
        assert!(keys.contains(&"garch_midas.k"));
        assert!(keys.contains(&"garch_midas.bogus"));
        assert!(keys.contains(&"regressors.r2"));
        assert!(issues.iter().any(|i| i.message == "K must be >= 1"));
    }

    #[test]
    fn syntax_errors_are_one_issue() {
        let issues = parse_config("[data\nreturns=", Path::new("."), Path::new("c.toml")).unwrap_err();
        assert_eq!(issues.len(), 1);
    }
}
