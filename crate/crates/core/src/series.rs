//! Date-indexed series, log returns and daily/monthly alignment.
//!
//! Every downstream estimator consumes either a [`TimeSeries`], a
//! [`ReturnSeries`] or an [`AlignedPanel`]. All three are immutable once
//! built; constructors enforce the ordering and length invariants.

use std::fmt;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("series is empty")]
    EmptySeries,
    #[error("dates are not strictly increasing at index {0}")]
    Unordered(usize),
    #[error("{dates} dates but {values} values")]
    LengthMismatch { dates: usize, values: usize },
    #[error("monthly date {0} is not the first of its month")]
    NonCanonicalMonth(NaiveDate),
    #[error("non-positive price {value} on {date}")]
    NonPositivePrice { date: NaiveDate, value: f64 },
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("series do not overlap")]
    NoOverlap,
    #[error("series `{name}` has the wrong frequency ({found})")]
    FrequencyMismatch { name: String, found: Frequency },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frequency {
    Daily,
    Monthly,
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frequency::Daily => f.write_str("daily"),
            Frequency::Monthly => f.write_str("monthly"),
        }
    }
}

/// CSV layouts accepted by [`load_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvSchema {
    /// `date,value`
    DateValue,
    /// Seven-column Yahoo Finance export; the `Adj Close` column is read.
    YahooOhlc,
}

/// Months since year 0, used as the low-frequency period key.
pub fn month_key(date: NaiveDate) -> i32 {
    date.year() * 12 + date.month0() as i32
}

pub fn month_start(date: NaiveDate) -> NaiveDate {
    NaiveDate::from_ymd_opt(date.year(), date.month(), 1).expect("valid month start")
}

pub fn month_from_key(key: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(key.div_euclid(12), key.rem_euclid(12) as u32 + 1, 1)
        .expect("valid month key")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    frequency: Frequency,
}

impl TimeSeries {
    pub fn new(
        name: impl Into<String>,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
        frequency: Frequency,
    ) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(SeriesError::LengthMismatch { dates: dates.len(), values: values.len() });
        }
        if dates.is_empty() {
            return Err(SeriesError::EmptySeries);
        }
        for (i, w) in dates.windows(2).enumerate() {
            if w[1] == w[0] {
                return Err(SeriesError::DuplicateDate(w[0]));
            }
            if w[1] < w[0] {
                return Err(SeriesError::Unordered(i + 1));
            }
        }
        if frequency == Frequency::Monthly {
            if let Some(d) = dates.iter().find(|d| d.day() != 1) {
                return Err(SeriesError::NonCanonicalMonth(*d));
            }
        }
        Ok(Self { name: name.into(), dates, values, frequency })
    }

    /// Builds a monthly series, snapping every date to the first of its month.
    pub fn monthly(name: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let dates = dates.into_iter().map(month_start).collect();
        Self::new(name, dates, values, Frequency::Monthly)
    }

    pub fn daily(name: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        Self::new(name, dates, values, Frequency::Daily)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keeps observations with `start <= date <= end`.
    pub fn slice_dates(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<Self> {
        let (dates, values): (Vec<_>, Vec<_>) = self
            .dates
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| start.is_none_or(|s| **d >= s) && end.is_none_or(|e| **d <= e))
            .map(|(d, v)| (*d, *v))
            .unzip();
        Self::new(self.name.clone(), dates, values, self.frequency)
    }

    /// First differences; dates are the later date of each pair.
    pub fn diff(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(SeriesError::TooShort { needed: 2, got: self.len() });
        }
        let values = self.values.windows(2).map(|w| w[1] - w[0]).collect();
        Self::new(self.name.clone(), self.dates[1..].to_vec(), values, self.frequency)
    }

    /// `100 * ln(x_t / x_{t-1})`.
    pub fn log_diff(&self) -> Result<Self> {
        let r = log_returns(self)?;
        Self::new(self.name.clone(), r.dates, r.returns, self.frequency)
    }

    /// Averages a daily series within each calendar month.
    pub fn monthly_mean(&self) -> Result<Self> {
        let mut dates = Vec::new();
        let mut values = Vec::new();
        let mut i = 0;
        while i < self.len() {
            let key = month_key(self.dates[i]);
            let mut j = i;
            let mut sum = 0.0;
            while j < self.len() && month_key(self.dates[j]) == key {
                sum += self.values[j];
                j += 1;
            }
            dates.push(month_from_key(key));
            values.push(sum / (j - i) as f64);
            i = j;
        }
        Self::new(self.name.clone(), dates, values, Frequency::Monthly)
    }
}

/// Daily log returns in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<f64>) -> Result<Self> {
        TimeSeries::daily("returns", dates.clone(), returns.clone())?;
        Ok(Self { dates, returns })
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn to_series(&self) -> TimeSeries {
        TimeSeries::daily("returns", self.dates.clone(), self.returns.clone())
            .expect("return series invariants hold")
    }
}

/// `r_i = 100 * ln(p_i / p_{i-1})`, dated at the later observation.
pub fn log_returns(prices: &TimeSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(SeriesError::TooShort { needed: 2, got: prices.len() });
    }
    for (d, v) in prices.dates.iter().zip(&prices.values) {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(SeriesError::NonPositivePrice { date: *d, value: *v });
        }
    }
    let returns = prices.values.windows(2).map(|w| 100.0 * (w[1] / w[0]).ln()).collect();
    Ok(ReturnSeries { dates: prices.dates[1..].to_vec(), returns })
}

fn parse_date(raw: &str) -> Option<(NaiveDate, bool)> {
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Some((d, false));
    }
    NaiveDate::parse_from_str(&format!("{raw}-01"), "%Y-%m-%d").ok().map(|d| (d, true))
}

/// Reads a series from CSV. Frequency is inferred: a file whose dates are
/// all first-of-month (or written `YYYY-MM`) with at most one row per month
/// is monthly, anything else daily.
pub fn load_csv(path: impl AsRef<Path>, schema: CsvSchema) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| SeriesError::Io(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("series").to_string();
    read_csv(file, schema, name)
}

pub fn read_csv(reader: impl std::io::Read, schema: CsvSchema, name: String) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| SeriesError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let (date_col, value_col) = match schema {
        CsvSchema::DateValue => (0, 1),
        CsvSchema::YahooOhlc => {
            let find = |key: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(key));
            let date = find("date").unwrap_or(0);
            let value = find("adj close")
                .or_else(|| find("adj_close"))
                .ok_or(SeriesError::Parse { line: 1, message: "missing `Adj Close` column".into() })?;
            (date, value)
        }
    };

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    let mut all_month_form = true;
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| SeriesError::Parse { line, message: e.to_string() })?;
        let (Some(raw_date), Some(raw_value)) = (record.get(date_col), record.get(value_col)) else {
            return Err(SeriesError::Parse { line, message: "too few columns".into() });
        };
        // Yahoo marks non-trading rows with `null`; those days are simply absent.
        if schema == CsvSchema::YahooOhlc && raw_value.eq_ignore_ascii_case("null") {
            continue;
        }
        let (date, month_form) = parse_date(raw_date)
            .ok_or_else(|| SeriesError::Parse { line, message: format!("bad date `{raw_date}`") })?;
        all_month_form &= month_form || date.day() == 1;
        let value: f64 = raw_value
            .parse()
            .map_err(|_| SeriesError::Parse { line, message: format!("bad value `{raw_value}`") })?;
        rows.push((date, value));
    }
    if rows.is_empty() {
        return Err(SeriesError::EmptySeries);
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(SeriesError::DuplicateDate(w[0].0));
    }
    let distinct_months = rows.windows(2).all(|w| month_key(w[0].0) != month_key(w[1].0));
    let frequency = if all_month_form && distinct_months && rows.len() > 1 {
        Frequency::Monthly
    } else {
        Frequency::Daily
    };
    let (dates, values) = rows.into_iter().unzip();
    TimeSeries::new(name, dates, values, frequency)
}

/// Writes `date,value` with shortest round-trip float formatting.
pub fn write_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref()).map_err(|e| SeriesError::Io(e.to_string()))?;
    write_csv_to(series, file)
}

pub fn write_csv_to(series: &TimeSeries, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| SeriesError::Io(e.to_string());
    w.write_record(["date", "value"]).map_err(io)?;
    for (d, v) in series.dates.iter().zip(&series.values) {
        w.write_record([d.format("%Y-%m-%d").to_string(), v.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| SeriesError::Io(e.to_string()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AlignOptions {
    /// Value used for month `t` is the monthly observation of month `t - lag_months`.
    pub lag_months: u32,
}

/// Daily-frequency panel of mixed-frequency regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    daily_dates: Vec<NaiveDate>,
    columns: Vec<(String, Frequency, Vec<f64>)>,
    period_index: Vec<usize>,
    periods: Vec<NaiveDate>,
}

impl AlignedPanel {
    pub fn daily_dates(&self) -> &[NaiveDate] {
        &self.daily_dates
    }

    pub fn len(&self) -> usize {
        self.daily_dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.daily_dates.is_empty()
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _, _)| n.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _, _)| n == name).map(|(_, _, v)| v.as_slice())
    }

    /// Low-frequency period of each daily date, counted from the first month in the panel.
    pub fn period_index(&self) -> &[usize] {
        &self.period_index
    }

    /// First-of-month date of each period.
    pub fn periods(&self) -> &[NaiveDate] {
        &self.periods
    }

    /// The column as a series at its source frequency (monthly columns are collapsed back).
    pub fn column_series(&self, name: &str) -> Option<TimeSeries> {
        let (n, freq, values) = self.columns.iter().find(|(n, _, _)| n == name)?;
        match freq {
            Frequency::Daily => TimeSeries::daily(n.clone(), self.daily_dates.clone(), values.clone()).ok(),
            Frequency::Monthly => {
                let mut dates = Vec::new();
                let mut vals = Vec::new();
                for (i, &p) in self.period_index.iter().enumerate() {
                    if i == 0 || self.period_index[i - 1] != p {
                        dates.push(self.periods[p]);
                        vals.push(values[i]);
                    }
                }
                TimeSeries::monthly(n.clone(), dates, vals).ok()
            }
        }
    }
}

/// Intersects daily series on common dates and broadcasts monthly series
/// onto every trading day of their month.
pub fn align(daily: &[TimeSeries], monthly: &[TimeSeries]) -> Result<AlignedPanel> {
    align_with(daily, monthly, AlignOptions::default())
}

pub fn align_with(daily: &[TimeSeries], monthly: &[TimeSeries], opts: AlignOptions) -> Result<AlignedPanel> {
    for s in daily {
        if s.frequency != Frequency::Daily {
            return Err(SeriesError::FrequencyMismatch { name: s.name.clone(), found: s.frequency });
        }
    }
    for s in monthly {
        if s.frequency != Frequency::Monthly {
            return Err(SeriesError::FrequencyMismatch { name: s.name.clone(), found: s.frequency });
        }
    }
    let Some(first) = daily.first() else {
        return Err(SeriesError::NoOverlap);
    };

    // Two-pointer intersection of the daily calendars, carrying per-series positions.
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); daily.len()];
    let mut dates = Vec::new();
    let mut cursors = vec![0usize; daily.len()];
    'outer: for (i0, d) in first.dates.iter().enumerate() {
        let mut found = vec![i0];
        for (s, cur) in daily.iter().zip(cursors.iter_mut()).skip(1) {
            while *cur < s.len() && s.dates[*cur] < *d {
                *cur += 1;
            }
            if *cur >= s.len() || s.dates[*cur] != *d {
                continue 'outer;
            }
            found.push(*cur);
        }
        // Keep only days whose (lagged) month exists in every monthly series.
        let key = month_key(*d) - opts.lag_months as i32;
        if monthly.iter().any(|m| m.dates.binary_search(&month_from_key(key)).is_err()) {
            continue;
        }
        dates.push(*d);
        for (p, i) in positions.iter_mut().zip(found) {
            p.push(i);
        }
    }
    if dates.is_empty() {
        return Err(SeriesError::NoOverlap);
    }

    let mut columns = Vec::with_capacity(daily.len() + monthly.len());
    for (s, pos) in daily.iter().zip(&positions) {
        columns.push((s.name.clone(), Frequency::Daily, pos.iter().map(|&i| s.values[i]).collect()));
    }
    for m in monthly {
        let values = dates
            .iter()
            .map(|d| {
                let src = month_from_key(month_key(*d) - opts.lag_months as i32);
                m.values[m.dates.binary_search(&src).expect("month checked above")]
            })
            .collect();
        columns.push((m.name.clone(), Frequency::Monthly, values));
    }

    let base = month_key(dates[0]);
    let last = month_key(*dates.last().expect("non-empty"));
    let period_index = dates.iter().map(|d| (month_key(*d) - base) as usize).collect();
    let periods = (base..=last).map(month_from_key).collect();
    Ok(AlignedPanel { daily_dates: dates, columns, period_index, periods })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn weekdays(from: &str, to: &str) -> Vec<NaiveDate> {
        let (mut cur, end) = (d(from), d(to));
        let mut out = Vec::new();
        while cur <= end {
            if cur.weekday().num_days_from_monday() < 5 {
                out.push(cur);
            }
            cur = cur.succ_opt().unwrap();
        }
        out
    }

    #[test]
    fn reads_date_value_rows() {
        let csv = "date,value\n2020-01-02,10.0\n2020-01-03,11.0\n";
        let s = read_csv(csv.as_bytes(), CsvSchema::DateValue, "x".into()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.frequency(), Frequency::Daily);
        assert_eq!(s.values(), &[10.0, 11.0]);
    }

    #[test]
    fn rejects_duplicate_dates() {
        let csv = "date,value\n2020-01-02,10.0\n2020-01-02,11.0\n";
        let err = read_csv(csv.as_bytes(), CsvSchema::DateValue, "x".into()).unwrap_err();
        assert_eq!(err, SeriesError::DuplicateDate(d("2020-01-02")));
    }

    #[test]
    fn reports_row_of_malformed_value() {
        let csv = "date,value\n2020-01-02,10.0\n2020-01-03,abc\n";
        match read_csv(csv.as_bytes(), CsvSchema::DateValue, "x".into()) {
            Err(SeriesError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let empty = "date,value\n";
        assert_eq!(read_csv(empty.as_bytes(), CsvSchema::DateValue, "x".into()), Err(SeriesError::EmptySeries));
    }

    #[test]
    fn yahoo_export_uses_adjusted_close_in_date_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("aia.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "Date,Open,High,Low,Close,Adj Close,Volume").unwrap();
        writeln!(f, "2020-01-06,50,51,49,50.5,48.1,1000").unwrap();
        writeln!(f, "2020-01-02,50,51,49,50.0,47.0,1000").unwrap();
        writeln!(f, "2020-01-03,50,51,49,50.2,47.5,1000").unwrap();
        writeln!(f, "2020-01-08,50,51,49,50.9,48.9,1000").unwrap();
        writeln!(f, "2020-01-07,50,51,49,50.1,48.0,1000").unwrap();
        drop(f);
        let s = load_csv(&path, CsvSchema::YahooOhlc).unwrap();
        assert_eq!(s.name(), "aia");
        assert_eq!(s.values(), &[47.0, 47.5, 48.1, 48.0, 48.9]);
        assert_eq!(s.dates()[0], d("2020-01-02"));
    }

    #[test]
    fn monthly_files_are_detected() {
        let csv = "date,value\n2020-01,1.0\n2020-02,2.0\n2020-03,3.0\n";
        let s = read_csv(csv.as_bytes(), CsvSchema::DateValue, "m".into()).unwrap();
        assert_eq!(s.frequency(), Frequency::Monthly);
        assert_eq!(s.dates()[1], d("2020-02-01"));
    }

    #[test]
    fn log_return_examples() {
        let dates = vec![d("2020-01-02"), d("2020-01-03")];
        let flat = TimeSeries::daily("p", dates.clone(), vec![100.0, 100.0]).unwrap();
        assert_eq!(log_returns(&flat).unwrap().returns, vec![0.0]);

        let up = TimeSeries::daily("p", dates.clone(), vec![100.0, 110.0]).unwrap();
        let r = log_returns(&up).unwrap();
        assert!((r.returns[0] - 9.531_017_980_432_486).abs() < 1e-12);
        assert_eq!(r.dates, vec![d("2020-01-03")]);

        let bad = TimeSeries::daily("p", dates, vec![100.0, -1.0]).unwrap();
        assert!(matches!(log_returns(&bad), Err(SeriesError::NonPositivePrice { .. })));

        let one = TimeSeries::daily("p", vec![d("2020-01-02")], vec![1.0]).unwrap();
        assert!(matches!(log_returns(&one), Err(SeriesError::TooShort { .. })));
    }

    #[test]
    fn monthly_value_broadcasts_over_its_month() {
        let days = weekdays("2020-01-01", "2020-01-31");
        assert_eq!(days.len(), 23);
        let daily = TimeSeries::daily("px", days[..21].to_vec(), vec![1.0; 21]).unwrap();
        let monthly = TimeSeries::monthly("nfci", vec![d("2020-01-01")], vec![5.0]).unwrap();
        let panel = align(&[daily], &[monthly]).unwrap();
        assert_eq!(panel.len(), 21);
        assert!(panel.column("nfci").unwrap().iter().all(|&v| v == 5.0));
        assert!(panel.period_index().iter().all(|&p| p == 0));
    }

    #[test]
    fn panel_is_restricted_to_common_span() {
        let days = weekdays("2020-01-01", "2020-02-29");
        let n = days.len();
        let daily = TimeSeries::daily("px", days, vec![1.0; n]).unwrap();
        let monthly =
            TimeSeries::monthly("ip", vec![d("2020-02-01"), d("2020-03-01")], vec![2.0, 3.0]).unwrap();
        let panel = align(&[daily], &[monthly]).unwrap();
        assert!(panel.daily_dates().iter().all(|x| x.month() == 2));
        assert_eq!(panel.len(), 20);
        assert!(panel.column("ip").unwrap().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn disjoint_ranges_do_not_overlap() {
        let daily = TimeSeries::daily("px", weekdays("2020-01-01", "2020-01-31"), vec![1.0; 23]).unwrap();
        let monthly = TimeSeries::monthly("ip", vec![d("2021-01-01")], vec![1.0]).unwrap();
        assert_eq!(align(&[daily.clone()], &[monthly.clone()]), Err(SeriesError::NoOverlap));
        assert!(matches!(align(&[monthly], &[daily]), Err(SeriesError::FrequencyMismatch { .. })));
    }

    #[test]
    fn lag_option_shifts_months_back() {
        let days = weekdays("2020-02-01", "2020-02-29");
        let n = days.len();
        let daily = TimeSeries::daily("px", days, vec![1.0; n]).unwrap();
        let monthly =
            TimeSeries::monthly("ip", vec![d("2020-01-01"), d("2020-02-01")], vec![7.0, 8.0]).unwrap();
        let panel = align_with(&[daily], &[monthly], AlignOptions { lag_months: 1 }).unwrap();
        assert!(panel.column("ip").unwrap().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn daily_calendars_intersect() {
        let a = TimeSeries::daily("a", vec![d("2020-01-02"), d("2020-01-03"), d("2020-01-06")], vec![1.0, 2.0, 3.0])
            .unwrap();
        let b = TimeSeries::daily("b", vec![d("2020-01-03"), d("2020-01-06"), d("2020-01-07")], vec![4.0, 5.0, 6.0])
            .unwrap();
        let panel = align(&[a, b], &[]).unwrap();
        assert_eq!(panel.daily_dates(), &[d("2020-01-03"), d("2020-01-06")]);
        assert_eq!(panel.column("a").unwrap(), &[2.0, 3.0]);
        assert_eq!(panel.column("b").unwrap(), &[4.0, 5.0]);
    }

    #[test]
    fn monthly_mean_and_diff() {
        let s = TimeSeries::daily("v", vec![d("2020-01-02"), d("2020-01-03"), d("2020-02-03")], vec![1.0, 3.0, 5.0])
            .unwrap();
        let m = s.monthly_mean().unwrap();
        assert_eq!(m.values(), &[2.0, 5.0]);
        assert_eq!(m.frequency(), Frequency::Monthly);
        assert_eq!(s.diff().unwrap().values(), &[2.0, 2.0]);
    }
}
