//! CSV and SVG output for sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::harness::{CellSummary, SweepResult};

pub const CSV_HEADER: &str = "trial,range_cm,density_per_cm3,iteration,newly_localized,cumulative_coverage,mean_err_mm,rmse_mm,bound_linear_mm,bound_variance_mm";
pub const SUMMARY_HEADER: &str =
    "range_cm,density_per_cm3,trials,median_terminal_iteration,mean_terminal_iteration,max_terminal_iteration";

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct ReportError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError {
        path: path.to_path_buf(),
        source,
    })
}

/// Plain decimal with at most six significant digits and no trailing zeros.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 6;
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x.is_infinite() { format!("{x}") } else { "0".into() };
    }
    // let the {:e} formatter do the rounding, then re-place the decimal point
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let point = exp + 1; // digits before the decimal point
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(digits);
    } else if point as usize >= digits.len() {
        out.push_str(digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        let (int, frac) = digits.split_at(point as usize);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut s = String::with_capacity(64 * (result.rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            format_sig(r.range_cm),
            format_sig(r.density_per_cm3),
            r.iteration,
            r.newly_localized,
            format_sig(r.cumulative_coverage),
            format_sig(r.mean_err_mm),
            format_sig(r.rmse_mm),
            format_sig(r.bound_linear_mm),
            format_sig(r.bound_variance_mm),
        );
    }
    s
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), ReportError> {
    write_file(path, &csv_string(result))
}

/// Per-cell medians and means of the terminal iteration count.
pub fn emit_summary_csv(result: &SweepResult, path: &Path) -> Result<(), ReportError> {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for c in &result.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            format_sig(c.range_cm),
            format_sig(c.density_per_cm3),
            c.trials,
            format_sig(c.median_terminal_iteration),
            format_sig(c.mean_terminal_iteration),
            c.max_terminal_iteration
        );
    }
    write_file(path, &s)
}

fn color(t: f64) -> String {
    // pale yellow -> dark red
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 140.0), lerp(240.0, 20.0), lerp(180.0, 30.0))
}

/// Heatmap of median terminal iterations: range (cm) along x, density
/// (per cm³, log scale) along y, value printed in every cell.
pub fn heatmap_svg(cells: &[CellSummary]) -> String {
    let mut ranges: Vec<f64> = cells.iter().map(|c| c.range_cm).collect();
    ranges.sort_by(f64::total_cmp);
    ranges.dedup();
    let mut logs: Vec<f64> = cells
        .iter()
        .map(|c| c.density_per_cm3.max(f64::MIN_POSITIVE).log10())
        .collect();
    logs.sort_by(f64::total_cmp);
    logs.dedup();

    let min_gap = logs
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let half_band = if min_gap.is_finite() { 0.5 * min_gap } else { 0.5 };
    let (log_lo, log_hi) = (logs[0] - half_band, logs[logs.len() - 1] + half_band);

    let (left, top, cell_w, band_h) = (90.0, 50.0, 110.0, 80.0);
    let px_per_decade = band_h / (2.0 * half_band);
    let plot_w = cell_w * ranges.len() as f64;
    let plot_h = (log_hi - log_lo) * px_per_decade;
    let width = left + plot_w + 30.0;
    let height = top + plot_h + 70.0;
    let y_of = |log: f64| top + (log_hi - log) * px_per_decade;

    let values: Vec<f64> = cells.iter().map(|c| c.median_terminal_iteration).collect();
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="13">"#,
        w = width,
        h = height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">Median localization iterations</text>"#,
        left + plot_w / 2.0
    );
    for c in cells {
        let col = ranges
            .iter()
            .position(|&r| r == c.range_cm)
            .expect("range present");
        let log = c.density_per_cm3.max(f64::MIN_POSITIVE).log10();
        let x = left + col as f64 * cell_w;
        let y0 = y_of(log + half_band);
        let h = 2.0 * half_band * px_per_decade;
        let t = if vmax > vmin {
            (c.median_terminal_iteration - vmin) / (vmax - vmin)
        } else {
            0.5
        };
        let _ = writeln!(
            s,
            r##"<rect class="cell" x="{x:.1}" y="{y0:.1}" width="{cell_w:.1}" height="{h:.1}" fill="{}" stroke="#333" stroke-width="0.5" data-range-cm="{}" data-density="{}"/>"##,
            color(t),
            format_sig(c.range_cm),
            format_sig(c.density_per_cm3)
        );
        let fill = if t > 0.6 { "white" } else { "black" };
        let _ = writeln!(
            s,
            r#"<text class="value" x="{:.1}" y="{:.1}" text-anchor="middle" dominant-baseline="middle" fill="{fill}" data-range-cm="{}" data-density="{}">{}</text>"#,
            x + cell_w / 2.0,
            y0 + h / 2.0,
            format_sig(c.range_cm),
            format_sig(c.density_per_cm3),
            format_sig(c.median_terminal_iteration)
        );
    }
    for (i, r) in ranges.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            left + (i as f64 + 0.5) * cell_w,
            top + plot_h + 20.0,
            format_sig(*r)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Communication range (cm)</text>"#,
        left + plot_w / 2.0,
        top + plot_h + 45.0
    );
    for &log in &logs {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            left - 8.0,
            y_of(log),
            format_sig(10f64.powf(log))
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle">Density (per cm³, log scale)</text>"#,
        top + plot_h / 2.0
    );
    s.push_str("</svg>\n");
    s
}

pub fn emit_heatmap(result: &SweepResult, path: &Path) -> Result<(), ReportError> {
    if result.cells.is_empty() {
        return Err(ReportError {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "sweep has no cells"),
        });
    }
    write_file(path, &heatmap_svg(&result.cells))
}
