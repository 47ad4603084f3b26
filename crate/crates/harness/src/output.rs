//! CSV and SVG rendering of sweep rows.
//!
//! The CSV has one line per (P, policy, seed) with the header
//! `P,policy,sum_mse,max_mse,lower_sum,lower_max,converged,seed`. Floats use
//! Rust's shortest round-trip formatting, so re-parsing gives back the exact
//! values.
//!
//! The SVG holds two line charts side by side, sum MSE and maximum MSE
//! against P, each with one `<polyline>` per policy (the median over seeds)
//! and a legend.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::config::PolicyName;
use crate::error::{HarnessError, Result};
use crate::sweep::{median, SweepRow};

pub const CSV_HEADER: &str = "P,policy,sum_mse,max_mse,lower_sum,lower_max,converged,seed";

/// The persisted part of a [`SweepRow`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub p: f64,
    pub policy: PolicyName,
    pub sum_mse: f64,
    pub max_mse: f64,
    pub lower_sum: f64,
    pub lower_max: f64,
    pub converged: bool,
    pub seed: u64,
}

impl From<&SweepRow> for CsvRecord {
    fn from(r: &SweepRow) -> Self {
        Self {
            p: r.p,
            policy: r.policy,
            sum_mse: r.sum_mse,
            max_mse: r.max_mse,
            lower_sum: r.lower_sum,
            lower_max: r.lower_max,
            converged: r.converged,
            seed: r.seed,
        }
    }
}

pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.p, r.policy, r.sum_mse, r.max_mse, r.lower_sum, r.lower_max, r.converged, r.seed
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(HarnessError::Config("CSV header does not match".into())),
    }
    let bad = |n: usize| HarnessError::Config(format!("malformed CSV line {n}"));
    let mut out = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad(i + 2));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2));
        out.push(CsvRecord {
            p: num(f[0])?,
            policy: f[1].parse()?,
            sum_mse: num(f[2])?,
            max_mse: num(f[3])?,
            lower_sum: num(f[4])?,
            lower_max: num(f[5])?,
            converged: f[6].parse().map_err(|_| bad(i + 2))?,
            seed: f[7].parse().map_err(|_| bad(i + 2))?,
        });
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::Config("no rows to write".into()));
    }
    write_file(path, &csv_string(rows))
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const PANEL: f64 = 480.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 110.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#7f7f7f"];

/// Median over seeds, keyed by policy, as `(P, value)` points sorted by P.
fn series(rows: &[SweepRow], value: impl Fn(&SweepRow) -> f64) -> BTreeMap<PolicyName, Vec<(f64, f64)>> {
    let mut grouped: BTreeMap<PolicyName, Vec<(f64, Vec<f64>)>> = BTreeMap::new();
    for r in rows {
        let points = grouped.entry(r.policy).or_default();
        match points.iter_mut().find(|(p, _)| *p == r.p) {
            Some((_, v)) => v.push(value(r)),
            None => points.push((r.p, vec![value(r)])),
        }
    }
    grouped
        .into_iter()
        .map(|(k, pts)| {
            let mut pts: Vec<(f64, f64)> =
                pts.into_iter().map(|(p, v)| (p, median(&v).unwrap_or(f64::NAN))).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (k, pts)
        })
        .collect()
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn chart(out: &mut String, x0: f64, title: &str, data: &BTreeMap<PolicyName, Vec<(f64, f64)>>) {
    let (px_lo, px_hi) = bounds(data.values().flatten().map(|v| v.0));
    let (py_lo, py_hi) = bounds(data.values().flatten().map(|v| v.1));
    let plot_w = PANEL - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| x0 + MARGIN_L + (x - px_lo) / (px_hi - px_lo) * plot_w;
    let sy = |y: f64| MARGIN_T + (py_hi - y) / (py_hi - py_lo) * plot_h;

    let _ = writeln!(out, r#"<g class="chart">"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        x0 + MARGIN_L + plot_w / 2.0
    );
    let _ = writeln!(
        out,
        r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x0 + MARGIN_L,
        MARGIN_T,
        plot_w,
        plot_h
    );
    for k in 0..=4 {
        let fx = px_lo + (px_hi - px_lo) * k as f64 / 4.0;
        let fy = py_lo + (py_hi - py_lo) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{fx:.2}</text>"#,
            sx(fx),
            MARGIN_T + plot_h + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{fy:.2}</text>"#,
            x0 + MARGIN_L - 6.0,
            sy(fy) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">P</text>"#,
        x0 + MARGIN_L + plot_w / 2.0,
        MARGIN_T + plot_h + 34.0
    );
    for (i, (policy, pts)) in data.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline data-policy="{policy}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN_T + plot_h + 52.0 + 14.0 * (i / 2) as f64;
        let lx = x0 + MARGIN_L + (i % 2) as f64 * 190.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{policy}</text>"#,
            lx + 26.0,
            ly + 4.0
        );
    }
    let _ = writeln!(out, "</g>");
}

pub fn svg_string(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    chart(&mut out, 0.0, "Sum MSE vs. P", &series(rows, |r| r.sum_mse));
    chart(&mut out, PANEL, "Maximum MSE vs. P", &series(rows, |r| r.max_mse));
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::Config("no rows to plot".into()));
    }
    write_file(path, &svg_string(rows))
}
