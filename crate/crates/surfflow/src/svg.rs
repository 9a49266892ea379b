//! Self-rendered SVG time series: one stacked panel per ledger column.

use std::fmt::Write as _;
use std::path::Path;

use surfflow_core::sim::LedgerRecord;

use crate::atomic::write_atomic;
use crate::error::{IoError, IoResult};

const WIDTH: f64 = 640.0;
const PANEL: f64 = 160.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn timeseries_svg(records: &[LedgerRecord], columns: &[&str]) -> IoResult<String> {
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| LedgerRecord::column_index(c).ok_or_else(|| IoError::UnknownColumn(c.to_string())))
        .collect::<IoResult<_>>()?;
    let height = MARGIN + PANEL * columns.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let t: Vec<f64> = records.iter().map(|r| r.time).collect();
    let (t0, t1) = bounds(&t);
    let plot_w = WIDTH - 2.0 * MARGIN;
    for (k, (&col, name)) in idx.iter().zip(columns).enumerate() {
        let top = 0.5 * MARGIN + PANEL * k as f64;
        let plot_h = PANEL - 36.0;
        let y: Vec<f64> = records.iter().map(|r| r.columns()[col]).collect();
        let (y0, y1) = bounds(&y);
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#888"/>"##
        );
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{:.1}">{}</text>"#, top - 4.0, escape(name));
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{y1:.3e}</text>"#, top + 10.0);
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{y0:.3e}</text>"#, top + plot_h);
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{:.1}">t = {t0:.3e}</text>"#, top + plot_h + 14.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">t = {t1:.3e}</text>"#,
            MARGIN + plot_w,
            top + plot_h + 14.0
        );
        if records.is_empty() {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">no data</text>"#,
                WIDTH / 2.0,
                top + plot_h / 2.0
            );
            continue;
        }
        let mut pts = String::new();
        for (ti, yi) in t.iter().zip(&y) {
            if !yi.is_finite() {
                continue;
            }
            let px = MARGIN + plot_w * (ti - t0) / (t1 - t0);
            let py = top + plot_h * (1.0 - (yi - y0) / (y1 - y0));
            let _ = write!(pts, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            pts.trim_end()
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_timeseries_svg(records: &[LedgerRecord], columns: &[&str], path: &Path) -> IoResult<()> {
    write_atomic(path, timeseries_svg(records, columns)?.as_bytes())
}

/// Finite range, widened so that constant series still get a box.
fn bounds(v: &[f64]) -> (f64, f64) {
    let (lo, hi) =
        v.iter().filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if lo > hi {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300_f64.max(1e-12 * hi.abs().max(lo.abs())) {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}
