//! Monte-Carlo execution: seeded trials, the range × density sweep and the
//! per-cell aggregates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ConfigError, ScenarioConfig};
use crate::localization::{localize_scenario, IterationStats, LocalizationState};

/// Seed of trial `trial_index`: the base seed XOR the index.
pub fn trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    base_seed ^ trial_index
}

pub fn trial_rng(config: &ScenarioConfig, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(config.seed, trial_index))
}

/// A trial's trace together with the final localization state.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u32,
    pub state: LocalizationState,
    pub trace: Vec<IterationStats>,
}

impl TrialOutcome {
    /// Number of iterations that localized at least one node.
    pub fn terminal_iteration(&self) -> u32 {
        self.trace.last().map_or(0, |s| s.iteration)
    }
}

pub fn run_trial_detailed(config: &ScenarioConfig, trial_index: u32) -> Result<TrialOutcome, ConfigError> {
    config.validate()?;
    let mut rng = trial_rng(config, trial_index as u64);
    let (state, trace) =
        localize_scenario(config, &mut rng).map_err(|e| ConfigError::Invalid(vec![e.to_string()]))?;
    Ok(TrialOutcome {
        trial: trial_index,
        state,
        trace,
    })
}

pub fn run_trial(config: &ScenarioConfig, trial_index: u32) -> Result<Vec<IterationStats>, ConfigError> {
    run_trial_detailed(config, trial_index).map(|o| o.trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub trial: u32,
    pub range_cm: f64,
    pub density_per_cm3: f64,
    pub iteration: u32,
    pub newly_localized: usize,
    pub cumulative_coverage: f64,
    pub mean_err_mm: f64,
    pub rmse_mm: f64,
    /// `n · σ`
    pub bound_linear_mm: f64,
    /// `√n · σ`
    pub bound_variance_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub range_cm: f64,
    pub density_per_cm3: f64,
    pub trials: u32,
    pub median_terminal_iteration: f64,
    pub mean_terminal_iteration: f64,
    pub max_terminal_iteration: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    /// Sorted by (range, density, trial, iteration).
    pub rows: Vec<SweepRow>,
    /// One entry per grid cell, sorted by (range, density).
    pub cells: Vec<CellSummary>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

pub fn rows_for_trace(
    trial: u32,
    range_cm: f64,
    density: f64,
    sigma: f64,
    trace: &[IterationStats],
) -> Vec<SweepRow> {
    trace
        .iter()
        .map(|s| SweepRow {
            trial,
            range_cm,
            density_per_cm3: density,
            iteration: s.iteration,
            newly_localized: s.newly_localized,
            cumulative_coverage: s.cumulative_coverage,
            mean_err_mm: s.mean_error,
            rmse_mm: s.rmse,
            bound_linear_mm: s.iteration as f64 * sigma,
            bound_variance_mm: (s.iteration as f64).sqrt() * sigma,
        })
        .collect()
}

/// Runs every (range, density) cell for `base.trials` trials.
///
/// Trials run in parallel; results are gathered by index and sorted, so the
/// output does not depend on completion order.
pub fn run_sweep(
    ranges_cm: &[f64],
    densities: &[f64],
    base: &ScenarioConfig,
) -> Result<SweepResult, ConfigError> {
    if ranges_cm.is_empty() || densities.is_empty() {
        return Err(ConfigError::Invalid(vec![
            "sweep grid needs at least one range and one density".into(),
        ]));
    }
    let mut ranges = ranges_cm.to_vec();
    let mut dens = densities.to_vec();
    ranges.sort_by(f64::total_cmp);
    ranges.dedup();
    dens.sort_by(f64::total_cmp);
    dens.dedup();

    let mut cells = Vec::new();
    for &r in &ranges {
        for &d in &dens {
            let cfg = ScenarioConfig {
                comm_range_cm: r,
                density_per_cm3: d,
                ..base.clone()
            };
            cfg.validate()?;
            cells.push(cfg);
        }
    }
    let jobs: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..base.trials).map(move |t| (c, t)))
        .collect();
    type Job = (usize, u32, Vec<IterationStats>);
    let traces: Vec<Result<Job, ConfigError>> = jobs
        .par_iter()
        .map(|&(c, t)| run_trial(&cells[c], t).map(|trace| (c, t, trace)))
        .collect();

    let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); cells.len()];
    let mut rows = Vec::new();
    for item in traces {
        let (c, t, trace) = item?;
        let cfg = &cells[c];
        per_cell[c].push(trace.last().map_or(0, |s| s.iteration) as f64);
        rows.extend(rows_for_trace(t, cfg.comm_range_cm, cfg.density_per_cm3, cfg.sigma_mm, &trace));
    }
    rows.sort_by(|a, b| {
        a.range_cm
            .total_cmp(&b.range_cm)
            .then(a.density_per_cm3.total_cmp(&b.density_per_cm3))
            .then(a.trial.cmp(&b.trial))
            .then(a.iteration.cmp(&b.iteration))
    });

    let cells = cells
        .iter()
        .zip(per_cell)
        .map(|(cfg, mut terminal)| {
            let n = terminal.len();
            let mean = terminal.iter().sum::<f64>() / n.max(1) as f64;
            let max = terminal.iter().fold(0.0f64, |m, &v| m.max(v)) as u32;
            CellSummary {
                range_cm: cfg.comm_range_cm,
                density_per_cm3: cfg.density_per_cm3,
                trials: n as u32,
                median_terminal_iteration: median(&mut terminal),
                mean_terminal_iteration: mean,
                max_terminal_iteration: max,
            }
        })
        .collect();
    Ok(SweepResult { rows, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            radius_cm: 6.0,
            trials: 3,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut []), 0.0);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn seed_mixing() {
        assert_eq!(trial_seed(0b1010, 0b0110), 0b1100);
        assert_eq!(trial_seed(42, 0), 42);
    }

    #[test]
    fn trials_repeat_exactly_and_differ_by_index() {
        let cfg = small();
        let a = run_trial(&cfg, 1).unwrap();
        let b = run_trial(&cfg, 1).unwrap();
        assert_eq!(a, b);
        let c0 = run_trial_detailed(&cfg, 0).unwrap();
        let c2 = run_trial_detailed(&cfg, 2).unwrap();
        let pos = |o: &TrialOutcome| o.state.node_set().nodes()[0].position;
        assert_ne!(pos(&c0), pos(&c2));
    }

    #[test]
    fn invalid_config_is_reported() {
        let cfg = ScenarioConfig {
            thickness_cm: 0.0,
            ..small()
        };
        assert!(matches!(run_trial(&cfg, 0), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn single_cell_sweep_equals_trial() {
        let cfg = ScenarioConfig { trials: 1, ..small() };
        let sweep = run_sweep(&[cfg.comm_range_cm], &[cfg.density_per_cm3], &cfg).unwrap();
        let trace = run_trial(&cfg, 0).unwrap();
        assert_eq!(
            sweep.rows,
            rows_for_trace(0, cfg.comm_range_cm, cfg.density_per_cm3, cfg.sigma_mm, &trace)
        );
        assert_eq!(sweep.cells.len(), 1);
        assert_eq!(sweep.cells[0].median_terminal_iteration, trace.len() as f64);
    }

    #[test]
    fn row_count_accounting() {
        let cfg = small();
        let ranges = [1.0, 2.0];
        let dens = [5.0, 10.0];
        let sweep = run_sweep(&ranges, &dens, &cfg).unwrap();
        let mut expected = 0;
        for &r in &ranges {
            for &d in &dens {
                let c = ScenarioConfig {
                    comm_range_cm: r,
                    density_per_cm3: d,
                    ..cfg.clone()
                };
                for t in 0..cfg.trials {
                    expected += run_trial(&c, t).unwrap().len();
                }
            }
        }
        assert_eq!(sweep.rows.len(), expected);
        assert!(run_sweep(&[], &dens, &cfg).is_err());
    }
}
