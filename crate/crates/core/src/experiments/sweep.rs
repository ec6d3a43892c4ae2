//! Replicated runs of the class-level engine over a grid of parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::time_average_c2;
use super::rate::{estimate_adaptation_rate, mean_and_se, post_burn_in, sample_sd, MIN_RECORDS};
use super::ExperimentError;
use crate::population::{Params, Population, DEFAULT_KD_BETA};
use crate::rng::stream_seed;
use crate::sim::{simulate_classes, ClassRun, SimConfig, SimError, SimMode, DEFAULT_MAX_EVENTS};

pub const DEFAULT_BURN_IN_FRACTION: f64 = 0.2;

/// Sweep configuration as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: Vec<Params>,
    pub replicates: u32,
    pub horizon: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    pub record_interval: f64,
    pub master_seed: u64,
    #[serde(default = "default_kd_beta")]
    pub kd_beta: f64,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
}

fn default_burn_in() -> f64 {
    DEFAULT_BURN_IN_FRACTION
}

fn default_kd_beta() -> f64 {
    DEFAULT_KD_BETA
}

fn default_max_events() -> u64 {
    DEFAULT_MAX_EVENTS
}

/// Coordinates of one run within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub grid_index: usize,
    pub replicate: u32,
    pub params: Params,
    pub seed: u64,
}

/// Outcome of one run. The statistics are absent when the run failed, in
/// which case `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub adaptation_rate: Option<f64>,
    pub rate_stderr: Option<f64>,
    pub mean_c2: Option<f64>,
    pub error: Option<String>,
}

/// Across-replicate statistics for one grid point. `rate_sd` is the sample
/// standard deviation of the per-replicate slopes and `rate_se` the
/// standard error of their mean; both need two completed replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub grid_index: usize,
    pub params: Params,
    pub completed: usize,
    pub failed: usize,
    pub mean_rate: Option<f64>,
    pub rate_sd: Option<f64>,
    pub rate_se: Option<f64>,
    pub mean_c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Grid-major, then replicate order.
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<GridSummary>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn budget_failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.error.as_deref().is_some_and(|e| e.contains("budget")))
            .count()
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.grid.is_empty() {
            return bad("grid must contain at least one parameter set".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return bad(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            ));
        }
        for (g, params) in self.grid.iter().enumerate() {
            self.sim_config(params, 0)
                .validate()
                .map_err(|e| ExperimentError::Config(format!("grid[{g}]: {e}")))?;
        }
        let times: Vec<f64> = self.sim_config(&self.grid[0], 0).record_times().collect();
        let cutoff = self.burn_in_fraction * times[times.len() - 1];
        let kept = times.iter().filter(|&&t| t >= cutoff).count();
        if kept < MIN_RECORDS {
            return bad(format!(
                "only {kept} records fall after burn-in; at least {MIN_RECORDS} are needed"
            ));
        }
        Ok(())
    }

    pub fn sim_config(&self, params: &Params, seed: u64) -> SimConfig {
        let mut cfg = SimConfig::new(
            *params,
            self.horizon,
            self.record_interval,
            seed,
            SimMode::ClassLevel,
        );
        cfg.kd_beta = self.kd_beta;
        cfg.max_events = self.max_events;
        cfg
    }

    pub fn cells(&self) -> Vec<SweepCell> {
        self.grid
            .iter()
            .enumerate()
            .flat_map(|(g, params)| {
                (0..self.replicates).map(move |r| SweepCell {
                    grid_index: g,
                    replicate: r,
                    params: *params,
                    seed: stream_seed(self.master_seed, g as u64, r as u64),
                })
            })
            .collect()
    }
}

/// Runs every cell of the sweep from the all-at-zero population and hands
/// the outcome to `f`. Results come back in [`SweepConfig::cells`] order
/// whatever the thread count; `threads = None` uses the rayon default.
pub fn map_cells<T, F>(
    cfg: &SweepConfig,
    threads: Option<usize>,
    f: F,
) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(&SweepCell, Result<ClassRun, SimError>) -> T + Sync,
{
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?;
    let cells = cfg.cells();
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let sim = cfg.sim_config(&cell.params, cell.seed);
                let initial =
                    Population::point_mass(0, cell.params.pop_size).expect("validated N >= 1");
                f(cell, simulate_classes(&sim, &initial))
            })
            .collect()
    }))
}

fn row(cell: &SweepCell, run: Result<ClassRun, SimError>, burn_in_fraction: f64) -> SweepRow {
    let failed = |e: String| SweepRow {
        cell: *cell,
        adaptation_rate: None,
        rate_stderr: None,
        mean_c2: None,
        error: Some(e),
    };
    let run = match run {
        Ok(run) => run,
        Err(e) => return failed(e.to_string()),
    };
    match estimate_adaptation_rate(&run.records, burn_in_fraction) {
        Ok(est) => SweepRow {
            cell: *cell,
            adaptation_rate: Some(est.rate),
            rate_stderr: Some(est.stderr),
            mean_c2: Some(time_average_c2(post_burn_in(
                &run.records,
                burn_in_fraction,
            ))),
            error: None,
        },
        Err(e) => failed(e.to_string()),
    }
}

fn summarize(cfg: &SweepConfig, rows: &[SweepRow]) -> Vec<GridSummary> {
    cfg.grid
        .iter()
        .enumerate()
        .map(|(g, params)| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.cell.grid_index == g).collect();
            let rates: Vec<f64> = mine.iter().filter_map(|r| r.adaptation_rate).collect();
            let c2s: Vec<f64> = mine.iter().filter_map(|r| r.mean_c2).collect();
            let (mean_rate, rate_se) = mean_and_se(&rates);
            let two = rates.len() >= 2;
            GridSummary {
                grid_index: g,
                params: *params,
                completed: rates.len(),
                failed: mine.len() - rates.len(),
                mean_rate: (!rates.is_empty()).then_some(mean_rate),
                rate_sd: two.then(|| sample_sd(&rates)),
                rate_se: two.then_some(rate_se),
                mean_c2: (!c2s.is_empty()).then(|| c2s.iter().sum::<f64>() / c2s.len() as f64),
            }
        })
        .collect()
}

/// Runs the sweep. Cells whose simulation fails (for example by exhausting
/// the event budget) are kept as rows with an error and no statistics;
/// the other cells are unaffected.
pub fn run_sweep(
    cfg: &SweepConfig,
    threads: Option<usize>,
) -> Result<SweepResult, ExperimentError> {
    let rows = map_cells(cfg, threads, |cell, run| {
        row(cell, run, cfg.burn_in_fraction)
    })?;
    let summaries = summarize(cfg, &rows);
    Ok(SweepResult { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(grid: Vec<Params>, replicates: u32, horizon: f64) -> SweepConfig {
        SweepConfig {
            grid,
            replicates,
            horizon,
            burn_in_fraction: 0.2,
            record_interval: horizon / 50.0,
            master_seed: 99,
            kd_beta: DEFAULT_KD_BETA,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let p = Params::new(10, 0.01, 0.5, 0.0).unwrap();
        assert!(config(vec![], 1, 10.0).validate().is_err());
        assert!(config(vec![p], 0, 10.0).validate().is_err());
        let mut c = config(vec![p], 1, 10.0);
        c.burn_in_fraction = 1.0;
        assert!(c.validate().is_err());
        let mut c = config(vec![p], 1, 10.0);
        c.record_interval = 2.0;
        assert!(c.validate().is_err(), "only 4 records after burn-in");
        let mut c = config(vec![p], 1, 10.0);
        c.grid[0].q = 1.5;
        assert!(
            matches!(c.validate(), Err(ExperimentError::Config(m)) if m.starts_with("grid[0]"))
        );
    }

    #[test]
    fn defaults_from_json() {
        let c: SweepConfig = serde_json::from_str(
            r#"{"grid":[{"pop_size":10,"mu":0.01,"q":0.5,"s":0.0}],"replicates":2,
                "horizon":10,"record_interval":0.5,"master_seed":1}"#,
        )
        .unwrap();
        assert_eq!(c.burn_in_fraction, 0.2);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"grid":[],"bogus":1}"#).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let grid = vec![
            Params::new(20, 0.05, 0.3, 0.05).unwrap(),
            Params::new(40, 0.05, 0.3, 0.05).unwrap(),
        ];
        let c = config(grid, 3, 20.0);
        let one = run_sweep(&c, Some(1)).unwrap();
        let four = run_sweep(&c, Some(4)).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.rows.len(), 6);
        let seeds: std::collections::BTreeSet<u64> = one.rows.iter().map(|r| r.cell.seed).collect();
        assert_eq!(seeds.len(), 6);
    }

    #[test]
    fn budget_failures_are_marked_not_fatal() {
        let grid = vec![
            Params::new(5, 0.01, 0.5, 0.0).unwrap(),
            Params::new(500, 0.01, 0.5, 0.0).unwrap(),
        ];
        let mut c = config(grid, 2, 10.0);
        c.max_events = 1000;
        let res = run_sweep(&c, Some(2)).unwrap();
        assert_eq!(res.summaries[0].completed, 2);
        assert_eq!(res.summaries[1].failed, 2);
        assert_eq!(res.budget_failures(), 2);
        assert!(res.summaries[1].mean_rate.is_none());
    }

    #[test]
    fn neutral_pure_deleterious_drift() {
        // Without selection the mean is a compensated random walk with drift
        // -mu; the replicate spread is wide so the check is statistical.
        let c = config(vec![Params::new(30, 0.01, 0.0, 0.0).unwrap()], 16, 400.0);
        let res = run_sweep(&c, None).unwrap();
        let g = &res.summaries[0];
        let (m, se) = (g.mean_rate.unwrap(), g.rate_se.unwrap());
        assert!((m + 0.01).abs() < 3.0 * se, "{m} +- {se}");
    }
}
