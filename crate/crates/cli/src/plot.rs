//! Minimal SVG line charts. Output is a pure function of the input data, so
//! repeated runs produce identical files.

use std::fmt::Write;

use chrono::{Datelike, NaiveDate};

const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 260.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 36.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Numeric,
    /// x values are day numbers from `NaiveDate::num_days_from_ce`.
    Dates,
}

#[derive(Debug, Clone)]
pub struct Line {
    pub label: String,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub xs: Vec<f64>,
    pub axis: XAxis,
    pub lines: Vec<Line>,
    /// Shaded band as (lower, upper), drawn under the lines.
    pub band: Option<(Vec<f64>, Vec<f64>)>,
    pub reference: Option<f64>,
}

impl Panel {
    pub fn dated(title: impl Into<String>, dates: &[NaiveDate], lines: Vec<Line>) -> Self {
        Self {
            title: title.into(),
            xs: dates.iter().map(|d| d.num_days_from_ce() as f64).collect(),
            axis: XAxis::Dates,
            lines,
            band: None,
            reference: None,
        }
    }
}

/// Round step near `span / target` from the 1-2-5 family.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let unit = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    unit * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 5.0);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10()).ceil() as usize };
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        Some((lo - pad, hi + pad))
    } else {
        let pad = 0.04 * (hi - lo);
        Some((lo - pad, hi + pad))
    }
}

fn render_panel(out: &mut String, p: &Panel, ox: f64, oy: f64) {
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let _ = writeln!(out, r#"<g transform="translate({ox:.1},{oy:.1})">"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>"#, PANEL_W / 2.0, escape(&p.title));
    let ys = p.lines.iter().flat_map(|l| l.ys.iter().copied());
    let band = p.band.iter().flat_map(|(lo, hi)| lo.iter().chain(hi.iter()).copied());
    let reference = p.reference.into_iter();
    let (Some((x0, x1)), Some((y0, y1))) = (range(p.xs.iter().copied()), range(ys.chain(band).chain(reference))) else {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">no data</text></g>"#, PANEL_W / 2.0, PANEL_H / 2.0);
        return;
    };
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * plot_h;

    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN_L:.1}" y="{MARGIN_T:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#888"/>"##
    );
    let ystep = nice_step(y1 - y0, 5.0);
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(out, r##"<line x1="{MARGIN_L:.1}" x2="{:.1}" y1="{y:.1}" y2="{y:.1}" stroke="#eee"/>"##, MARGIN_L + plot_w);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#, MARGIN_L - 4.0, y + 3.0, fmt_tick(t, ystep));
    }
    match p.axis {
        XAxis::Numeric => {
            let xstep = nice_step(x1 - x0, 5.0);
            for t in ticks(x0, x1) {
                let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#, sx(t), PANEL_H - MARGIN_B + 14.0, fmt_tick(t, xstep));
            }
        }
        XAxis::Dates => {
            let d0 = NaiveDate::from_num_days_from_ce_opt(x0.ceil() as i32).expect("date in range");
            let d1 = NaiveDate::from_num_days_from_ce_opt(x1.floor() as i32).expect("date in range");
            let years = (d1.year() - d0.year()).max(1);
            let every = nice_step(years as f64, 6.0).max(1.0) as i32;
            let mut year = d0.year() + 1;
            while year <= d1.year() {
                if year % every == 0 {
                    let x = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid").num_days_from_ce() as f64;
                    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{year}</text>"#, sx(x), PANEL_H - MARGIN_B + 14.0);
                }
                year += 1;
            }
        }
    }
    if let Some(r) = p.reference {
        let y = sy(r);
        let _ = writeln!(out, r##"<line x1="{MARGIN_L:.1}" x2="{:.1}" y1="{y:.1}" y2="{y:.1}" stroke="#555" stroke-dasharray="4 3"/>"##, MARGIN_L + plot_w);
    }
    if let Some((lo, hi)) = &p.band {
        let mut pts = String::new();
        let idx: Vec<usize> = (0..p.xs.len()).filter(|&i| lo[i].is_finite() && hi[i].is_finite()).collect();
        for &i in &idx {
            let _ = write!(pts, "{:.2},{:.2} ", sx(p.xs[i]), sy(hi[i]));
        }
        for &i in idx.iter().rev() {
            let _ = write!(pts, "{:.2},{:.2} ", sx(p.xs[i]), sy(lo[i]));
        }
        let _ = writeln!(out, r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.18" stroke="none"/>"##, pts.trim_end());
    }
    for (k, line) in p.lines.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for (x, y) in p.xs.iter().zip(&line.ys) {
            if !y.is_finite() {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2}", if pen_down { " L" } else { " M" }, sx(*x), sy(*y));
            pen_down = true;
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, d.trim_start());
        if p.lines.len() > 1 {
            let ly = MARGIN_T + 12.0 + 13.0 * k as f64;
            let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}" font-size="10" fill="{color}">{}</text>"#, MARGIN_L + 6.0, escape(&line.label));
        }
    }
    let _ = writeln!(out, "</g>");
}

/// Grid of panels, `columns` wide.
pub fn render(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1).min(panels.len().max(1));
    let rows = panels.len().div_ceil(columns).max(1);
    let (w, h) = (PANEL_W * columns as f64, PANEL_H * rows as f64);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, PANEL_W * (i % columns) as f64, PANEL_H * (i / columns) as f64);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_come_from_one_two_five() {
        assert_eq!(nice_step(10.0, 5.0), 2.0);
        assert_eq!(nice_step(0.7, 5.0), 0.2);
        assert_eq!(nice_step(300.0, 5.0), 100.0);
    }

    #[test]
    fn renders_well_formed_document() {
        let p = Panel {
            title: "a < b".into(),
            xs: vec![0.0, 1.0, 2.0],
            axis: XAxis::Numeric,
            lines: vec![Line { label: "y".into(), ys: vec![1.0, f64::NAN, 3.0] }],
            band: Some((vec![0.5, 0.5, 2.5], vec![1.5, 1.5, 3.5])),
            reference: Some(2.0),
        };
        let svg = render(&[p.clone(), p], 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<path").count(), 2);
    }

    #[test]
    fn constant_series_still_has_a_range() {
        let (lo, hi) = range([2.0, 2.0].into_iter()).unwrap();
        assert!(lo < 2.0 && hi > 2.0);
        assert!(range([f64::NAN].into_iter()).is_none());
    }
}
