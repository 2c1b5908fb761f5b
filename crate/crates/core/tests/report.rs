use std::collections::BTreeMap;

use nanoloc::config::ScenarioConfig;
use nanoloc::harness::{run_sweep, SweepResult};
use nanoloc::report::{csv_string, emit_csv, emit_heatmap, heatmap_svg, CSV_HEADER};

fn small() -> ScenarioConfig {
    ScenarioConfig {
        radius_cm: 5.0,
        trials: 5,
        seed: 77,
        ..ScenarioConfig::default()
    }
}

fn parse_csv(text: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    lines
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect())
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    // six significant digits
    (a - b).abs() <= 5e-6 * a.abs().max(b.abs()) + 1e-300
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 }
}

/// (range, density) → value printed in the heatmap cell.
fn heatmap_labels(svg: &str) -> BTreeMap<(String, String), f64> {
    let mut out = BTreeMap::new();
    for part in svg.split("<text class=\"value\"").skip(1) {
        let attr = |name: &str| {
            let start = part.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
            part[start..].split('"').next().unwrap().to_string()
        };
        let label = part.split('>').nth(1).unwrap().split('<').next().unwrap();
        out.insert((attr("data-range-cm"), attr("data-density")), label.parse().unwrap());
    }
    out
}

#[test]
fn csv_round_trips_within_printed_precision() {
    let result = run_sweep(&[1.0, 2.0], &[10.0], &small()).unwrap();
    let text = csv_string(&result);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let parsed = parse_csv(&text);
    assert_eq!(parsed.len(), result.rows.len());
    for (row, f) in result.rows.iter().zip(&parsed) {
        assert_eq!(f[0], row.trial as f64);
        assert_eq!(f[3], row.iteration as f64);
        assert_eq!(f[4], row.newly_localized as f64);
        let floats = [
            row.range_cm,
            row.density_per_cm3,
            row.cumulative_coverage,
            row.mean_err_mm,
            row.rmse_mm,
            row.bound_linear_mm,
            row.bound_variance_mm,
        ];
        for (v, g) in floats.iter().zip([f[1], f[2], f[5], f[6], f[7], f[8], f[9]]) {
            assert!(close(*v, g), "{v} printed as {g}");
        }
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let cfg = small();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| csv_string(&run_sweep(&[1.0, 2.0, 3.0], &[10.0, 20.0], &cfg).unwrap()))
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
}

#[test]
fn heatmap_shows_medians_recomputed_from_csv() {
    let result = run_sweep(&[1.0, 2.0, 3.0], &[10.0, 30.0], &small()).unwrap();
    let parsed = parse_csv(&csv_string(&result));
    let mut terminal: BTreeMap<(String, String, u64), f64> = BTreeMap::new();
    for f in &parsed {
        let key = (f[1].to_string(), f[2].to_string(), f[0] as u64);
        let e = terminal.entry(key).or_insert(0.0);
        *e = e.max(f[3]);
    }
    let mut per_cell: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for ((r, d, _), t) in terminal {
        per_cell.entry((r, d)).or_default().push(t);
    }
    let labels = heatmap_labels(&heatmap_svg(&result.cells));
    assert_eq!(labels.len(), per_cell.len());
    for (cell, values) in per_cell {
        assert_eq!(labels[&cell], median(values), "cell {cell:?}");
    }
}

#[test]
fn one_cell_grid_and_whole_disc_range() {
    let cfg = ScenarioConfig { trials: 3, ..small() };
    // 10 cm range covers the 5 cm radius disc from the boundary at once
    let result = run_sweep(&[10.0], &[10.0], &cfg).unwrap();
    let svg = heatmap_svg(&result.cells);
    assert_eq!(svg.matches("class=\"cell\"").count(), 1);
    let labels = heatmap_labels(&svg);
    assert_eq!(labels.values().copied().collect::<Vec<_>>(), vec![1.0]);
}

#[test]
fn io_failures_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/results.csv");
    let err = emit_csv(&SweepResult::default(), &missing).unwrap_err();
    assert!(err.to_string().contains("no/such/dir"));
    assert!(emit_heatmap(&SweepResult::default(), &dir.path().join("h.svg")).is_err());
    let ok = dir.path().join("results.csv");
    emit_csv(&SweepResult::default(), &ok).unwrap();
    assert_eq!(std::fs::read_to_string(ok).unwrap(), format!("{CSV_HEADER}\n"));
}
