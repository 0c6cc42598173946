//! CSV emission and a small SVG plotter.
//!
//! Every floating point value is written with 17 significant digits in
//! scientific notation, which round-trips `f64` exactly and does not depend
//! on the locale.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::device::PulseMap;
use crate::error::{Error, Result};
use crate::harness::{ArmSummary, ComparisonReport, TrialResult};
use crate::num::Float;
use crate::stats::WelchResult;

pub const LEARNING_CURVE_HEADER: &str = "trial,epoch,raw_reward,filtered_reward";
pub const SWEEP_HEADER: &str = "rule,lr_hidden,mean_epochs,std_epochs,n_converged";
pub const COMPARISON_HEADER: &str = "rule,mean,std,n_converged";
pub const STATS_HEADER: &str = "t,nu,p_one_sided,p_two_sided";
pub const PULSE_MAP_HEADER: &str = "voltage_v,duration_s,onoff_ratio";

/// 17 significant digits, e.g. `5.0000000000000000e-1`.
pub fn fmt_num<T: Float>(v: T) -> String {
    let v = v.as_f64();
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn learning_curve_csv<T: Float>(results: &[TrialResult<T>]) -> String {
    let mut s = String::from(LEARNING_CURVE_HEADER);
    s.push('\n');
    for r in results {
        for (i, (raw, filt)) in r.raw_curve.iter().zip(&r.filtered_curve).enumerate() {
            let _ = writeln!(s, "{},{},{},{}", r.trial, i + 1, fmt_num(*raw), fmt_num(*filt));
        }
    }
    s
}

pub fn write_learning_curve_csv<T: Float>(path: &Path, results: &[TrialResult<T>]) -> Result<()> {
    write_file(path, &learning_curve_csv(results))
}

pub fn sweep_csv<T: Float>(points: &[ArmSummary<T>]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{},{},{},{},{}", p.rule, fmt_num(p.lr_hidden), fmt_num(p.mean), fmt_num(p.std), p.n_converged);
    }
    s
}

pub fn comparison_csv<T: Float>(report: &ComparisonReport<T>) -> String {
    let mut s = String::from(COMPARISON_HEADER);
    s.push('\n');
    for a in &report.arms {
        let _ = writeln!(s, "{},{},{},{}", a.rule, fmt_num(a.mean), fmt_num(a.std), a.n_converged);
    }
    s
}

pub fn stats_csv<T: Float>(w: &WelchResult<T>) -> String {
    format!(
        "{STATS_HEADER}\n{},{},{},{}\n",
        fmt_num(w.t),
        fmt_num(w.nu),
        fmt_num(w.p_one_sided),
        fmt_num(w.p_two_sided)
    )
}

pub fn pulse_map_csv<T: Float>(map: &PulseMap<T>) -> String {
    let mut s = String::from(PULSE_MAP_HEADER);
    s.push('\n');
    for (v, d, r) in map.cells() {
        let _ = writeln!(s, "{},{},{}", fmt_num(v), fmt_num(d), fmt_num(r));
    }
    s
}

pub fn write_sweep_csv<T: Float>(path: &Path, points: &[ArmSummary<T>]) -> Result<()> {
    write_file(path, &sweep_csv(points))
}

pub fn write_comparison_csv<T: Float>(path: &Path, report: &ComparisonReport<T>) -> Result<()> {
    write_file(path, &comparison_csv(report))
}

pub fn write_stats_csv<T: Float>(path: &Path, w: &WelchResult<T>) -> Result<()> {
    write_file(path, &stats_csv(w))
}

pub fn write_pulse_map_csv<T: Float>(path: &Path, map: &PulseMap<T>) -> Result<()> {
    write_file(path, &pulse_map_csv(map))
}

/// Parsed CSV: header names and string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Domain("empty CSV".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, l) in lines.enumerate() {
            let row: Vec<String> = l.split(',').map(|s| s.trim().to_string()).collect();
            if row.len() != header.len() {
                return Err(Error::Domain(format!("CSV row {} has {} fields, expected {}", i + 2, row.len(), header.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn header_line(&self) -> String {
        self.header.join(",")
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Domain(format!("CSV has no `{name}` column")))
    }

    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| r[c].parse::<f64>().map_err(|e| Error::Domain(format!("bad number `{}` in `{name}`: {e}", r[c]))))
            .collect()
    }

    pub fn str_column(&self, name: &str) -> Result<Vec<String>> {
        let c = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[c].clone()).collect())
    }
}

// ---------------------------------------------------------------------------
// SVG

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub stroke_width: f64,
    pub markers: bool,
    /// Optional symmetric y error per point.
    pub y_err: Option<Vec<f64>>,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>, color: impl Into<String>) -> Self {
        Self { name: name.into(), points, color: color.into(), stroke_width: 1.5, markers: false, y_err: None }
    }
}

/// Affine map from data space to pixel space.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Self { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Line chart with axes, ticks and a legend.
pub fn line_plot_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let finite = |v: &f64| v.is_finite();
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).filter(finite).collect();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for (i, p) in s.points.iter().enumerate() {
            let e = s.y_err.as_ref().map_or(0.0, |e| e[i]);
            ys.extend([p.1 - e, p.1 + e]);
        }
    }
    ys.retain(finite);
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (x_lo, x_hi) = if xs.is_empty() { (0.0, 1.0) } else { (min(&xs), max(&xs)) };
    let (y_lo, y_hi) = if ys.is_empty() { (0.0, 1.0) } else { (min(&ys), max(&ys)) };
    let xa = Axis::new(x_lo, x_hi, MARGIN_L, WIDTH - MARGIN_R);
    let ya = Axis::new(y_lo, y_hi, HEIGHT - MARGIN_B, MARGIN_T);

    let mut s = svg_open(title);
    let (x0, x1, y0, y1) = (MARGIN_L, WIDTH - MARGIN_R, HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(s, r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#);
    for t in ticks(xa.lo, xa.hi, 5) {
        let px = xa.map(t);
        let _ = writeln!(s, r#"<line x1="{px:.3}" y1="{y0:.1}" x2="{px:.3}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.3}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 18.0, tick_label(t));
    }
    for t in ticks(ya.lo, ya.hi, 5) {
        let py = ya.map(t);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{py:.3}" x2="{x0:.1}" y2="{py:.3}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.3}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, tick_label(t));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );

    for ser in series {
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.3},{:.3}", xa.map(x), ya.map(y)))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
                pts.join(" "),
                ser.color,
                ser.stroke_width
            );
        }
        if ser.markers || pts.len() == 1 {
            for &(x, y) in ser.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{}"/>"#, xa.map(x), ya.map(y), ser.color);
            }
        }
        if let Some(errs) = &ser.y_err {
            for (&(x, y), &e) in ser.points.iter().zip(errs) {
                if x.is_finite() && y.is_finite() && e.is_finite() {
                    let px = xa.map(x);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{px:.3}" y1="{:.3}" x2="{px:.3}" y2="{:.3}" stroke="{}"/>"#,
                        ya.map(y - e),
                        ya.map(y + e),
                        ser.color
                    );
                }
            }
        }
    }
    let named: Vec<&Series> = series.iter().filter(|s| !s.name.is_empty()).collect();
    for (k, ser) in named.iter().enumerate() {
        let ly = MARGIN_T + 12.0 + 16.0 * k as f64;
        let lx = x1 - 130.0;
        let _ = writeln!(s, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/>"#, lx + 20.0, ser.color);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap with categorical axes; `values[row][col]`, rows drawn bottom-up.
pub fn heatmap_svg(title: &str, x_label: &str, y_label: &str, x_ticks: &[f64], y_ticks: &[f64], values: &[Vec<f64>]) -> String {
    let logs: Vec<f64> = values.iter().flatten().filter(|v| **v > 0.0).map(|v| v.ln()).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (x0, x1, y0, y1) = (MARGIN_L, WIDTH - MARGIN_R - 60.0, HEIGHT - MARGIN_B, MARGIN_T);
    let nx = x_ticks.len().max(1) as f64;
    let ny = y_ticks.len().max(1) as f64;
    let cw = (x1 - x0) / nx;
    let ch = (y0 - y1) / ny;

    let mut s = svg_open(title);
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let t = if v > 0.0 { (v.ln() - lo) / span } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{cw:.3}" height="{ch:.3}" fill="{}"><title>{}</title></rect>"#,
                x0 + c as f64 * cw,
                y0 - (r as f64 + 1.0) * ch,
                ramp(t),
                tick_label(v)
            );
        }
    }
    for (c, &t) in x_ticks.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.1}" text-anchor="middle">{}</text>"#, x0 + (c as f64 + 0.5) * cw, y0 + 18.0, tick_label(t));
    }
    for (r, &t) in y_ticks.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.3}" text-anchor="end">{}</text>"#, x0 - 8.0, y0 - (r as f64 + 0.5) * ch + 4.0, tick_label(t));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    // colour bar, log scale
    let bx = WIDTH - MARGIN_R - 40.0;
    for k in 0..10 {
        let t = k as f64 / 9.0;
        let h = (y0 - y1) / 10.0;
        let _ = writeln!(s, r#"<rect x="{bx:.1}" y="{:.3}" width="14" height="{h:.3}" fill="{}"/>"#, y0 - (k as f64 + 1.0) * h, ramp(t));
    }
    if logs.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, bx + 16.0, y0, tick_label(lo.exp()));
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, bx + 16.0, y1 + 10.0, tick_label(hi.exp()));
    s.push_str("</svg>\n");
    s
}

/// Dark blue to yellow.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(30.0, 250.0), lerp(30.0, 220.0), lerp(110.0, 40.0))
}

/// Text panel used for single-row statistic tables.
pub fn text_panel_svg(title: &str, table: &Table) -> String {
    let mut s = svg_open(title);
    for (k, (h, v)) in table.header.iter().zip(table.rows.first().into_iter().flatten()).enumerate() {
        let y = 80.0 + 24.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{MARGIN_L:.1}" y="{y:.1}">{} = {}</text>"#, escape(h), escape(v));
    }
    s.push_str("</svg>\n");
    s
}

/// Renders any of the CSV schemas written by this crate.
pub fn plot_csv(text: &str) -> Result<String> {
    let table = Table::parse(text)?;
    match table.header_line().as_str() {
        LEARNING_CURVE_HEADER => plot_learning_curves(&table),
        SWEEP_HEADER => {
            let rules = table.str_column("rule")?;
            let lr = table.f64_column("lr_hidden")?;
            let mean = table.f64_column("mean_epochs")?;
            let std = table.f64_column("std_epochs")?;
            let mut names: Vec<String> = rules.clone();
            names.dedup();
            let series: Vec<Series> = names
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    let idx: Vec<usize> = (0..rules.len()).filter(|&i| &rules[i] == name).collect();
                    Series {
                        markers: true,
                        y_err: Some(idx.iter().map(|&i| std[i]).collect()),
                        ..Series::line(name.clone(), idx.iter().map(|&i| (lr[i], mean[i])).collect(), PALETTE[k % PALETTE.len()])
                    }
                })
                .collect();
            Ok(line_plot_svg("Learning-rate sweep", "hidden learning rate", "epochs to goal", &series))
        }
        COMPARISON_HEADER => {
            let rules = table.str_column("rule")?;
            let mean = table.f64_column("mean")?;
            let std = table.f64_column("std")?;
            let series: Vec<Series> = rules
                .iter()
                .enumerate()
                .map(|(k, name)| Series {
                    markers: true,
                    y_err: Some(vec![std[k]]),
                    ..Series::line(name.clone(), vec![(k as f64, mean[k])], PALETTE[k % PALETTE.len()])
                })
                .collect();
            Ok(line_plot_svg("Epochs to goal by update rule", "rule index", "epochs to goal", &series))
        }
        STATS_HEADER => Ok(text_panel_svg("Welch t-test", &table)),
        PULSE_MAP_HEADER => {
            let v = table.f64_column("voltage_v")?;
            let d = table.f64_column("duration_s")?;
            let r = table.f64_column("onoff_ratio")?;
            let mut volts: Vec<f64> = Vec::new();
            let mut durs: Vec<f64> = Vec::new();
            for (&vi, &di) in v.iter().zip(&d) {
                if !volts.contains(&vi) {
                    volts.push(vi);
                }
                if !durs.contains(&di) {
                    durs.push(di);
                }
            }
            let mut grid = vec![vec![f64::NAN; durs.len()]; volts.len()];
            for ((&vi, &di), &ri) in v.iter().zip(&d).zip(&r) {
                let a = volts.iter().position(|&x| x == vi).unwrap();
                let b = durs.iter().position(|&x| x == di).unwrap();
                grid[a][b] = ri;
            }
            Ok(heatmap_svg("ON/OFF ratio after pulse train", "pulse duration (s)", "pulse voltage (V)", &durs, &volts, &grid))
        }
        other => Err(Error::Domain(format!("unrecognized CSV header `{other}`"))),
    }
}

fn plot_learning_curves(table: &Table) -> Result<String> {
    let trial = table.f64_column("trial")?;
    let epoch = table.f64_column("epoch")?;
    let filt = table.f64_column("filtered_reward")?;
    let mut series: Vec<Series> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    while start < trial.len() {
        let mut end = start;
        while end < trial.len() && trial[end] == trial[start] {
            end += 1;
        }
        let pts: Vec<(f64, f64)> = (start..end).map(|i| (epoch[i], filt[i])).collect();
        for &(e, f) in &pts {
            let k = e as usize;
            if k >= 1 {
                if sums.len() < k {
                    sums.resize(k, (0.0, 0));
                }
                sums[k - 1].0 += f;
                sums[k - 1].1 += 1;
            }
        }
        series.push(Series { stroke_width: 0.6, ..Series::line("", pts, "#b0b0b0") });
        start = end;
    }
    let mean: Vec<(f64, f64)> = sums.iter().enumerate().filter(|(_, s)| s.1 > 0).map(|(i, s)| ((i + 1) as f64, s.0 / s.1 as f64)).collect();
    series.push(Series { stroke_width: 2.0, ..Series::line("mean over running trials", mean, PALETTE[0]) });
    Ok(line_plot_svg("Filtered reward", "epoch", "filtered reward", &series))
}
