use chrono::{Datelike, Duration, NaiveDate};
use proptest::prelude::*;
use regimevol_core::series::{
    align, load_csv, log_returns, read_csv, write_csv, write_csv_to, CsvSchema, Frequency, TimeSeries,
};

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 4).unwrap()
}

/// Trading calendar that skips weekends plus every `gap`-th weekday (`gap < 2` skips none).
fn calendar(n: usize, gap: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start();
    let mut k = 0;
    while out.len() < n {
        if d.weekday().num_days_from_monday() < 5 {
            k += 1;
            if gap < 2 || k % gap != 0 {
                out.push(d);
            }
        }
        d += Duration::days(1);
    }
    out
}

fn monthly(name: &str, months: usize, values: impl Fn(usize) -> f64) -> TimeSeries {
    let dates = (0..months).map(|i| start().checked_add_months(chrono::Months::new(i as u32)).unwrap()).collect();
    TimeSeries::monthly(name, dates, (0..months).map(values).collect()).unwrap()
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = TimeSeries::daily("px", calendar(50, 7), (0..50).map(|i| 100.0 + (i as f64).sin()).collect()).unwrap();
    let path = dir.path().join("px.csv");
    write_csv(&s, &path).unwrap();
    let back = load_csv(&path, CsvSchema::DateValue).unwrap();
    assert_eq!(back, s);
}

#[test]
fn constant_prices_have_zero_returns() {
    let s = TimeSeries::daily("px", calendar(30, 0), vec![42.0; 30]).unwrap();
    let r = log_returns(&s).unwrap();
    assert_eq!(r.len(), 29);
    assert!(r.returns.iter().all(|v| *v == 0.0));
}

#[test]
fn monthly_columns_are_constant_within_a_month() {
    let d = TimeSeries::daily("r", calendar(400, 9), (0..400).map(|i| i as f64).collect()).unwrap();
    let m = monthly("ip", 30, |i| i as f64 * 1.5);
    let panel = align(&[d], &[m]).unwrap();
    let col = panel.column("ip").unwrap();
    for i in 1..panel.len() {
        if panel.period_index()[i] == panel.period_index()[i - 1] {
            assert_eq!(col[i], col[i - 1]);
        }
    }
    assert_eq!(panel.column_series("ip").unwrap().frequency(), Frequency::Monthly);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(values in prop::collection::vec(-1e12f64..1e12, 1..80)) {
        let s = TimeSeries::daily("v", calendar(values.len(), 0), values).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&s, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), CsvSchema::DateValue, "v".into()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn align_is_idempotent(n in 30usize..300, gap_a in 0usize..12, gap_b in 0usize..12, months in 3usize..20) {
        let a = TimeSeries::daily("a", calendar(n, gap_a), (0..n).map(|i| i as f64).collect()).unwrap();
        let b = TimeSeries::daily("b", calendar(n, gap_b), (0..n).map(|i| -(i as f64)).collect()).unwrap();
        let m = monthly("m", months, |i| i as f64);
        if let Ok(panel) = align(&[a, b], &[m]) {
            let again = align(
                &[panel.column_series("a").unwrap(), panel.column_series("b").unwrap()],
                &[panel.column_series("m").unwrap()],
            ).unwrap();
            prop_assert_eq!(again, panel);
        }
    }
}
