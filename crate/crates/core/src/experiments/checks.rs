//! Consistency checks on simulated trajectories.
//!
//! Single-trajectory standard errors come from batch means: the
//! post-burn-in window is cut into [`BATCHES`] contiguous pieces and the
//! spread of the per-batch statistic gives the uncertainty. Records along
//! one path are strongly autocorrelated, so the plain OLS standard error
//! would understate it. Pooled checks across independent replicates use
//! the replicate spread instead.

use serde::{Deserialize, Serialize};

use super::rate::{mean_and_se, ols, post_burn_in, MIN_RECORDS};
use super::ExperimentError;
use crate::population::{Params, TrajectoryRecord};
use crate::theory::drift_rate;

pub const BATCHES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    /// OLS slope of the mean fitness.
    pub rate: f64,
    /// Time average of `c2` over the window.
    pub mean_c2: f64,
    /// `mu (2q - 1) + s * mean_c2`.
    pub predicted: f64,
    pub discrepancy: f64,
    /// Batch-means standard error of the discrepancy.
    pub stderr: f64,
    /// `discrepancy / stderr`; zero when both vanish.
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub front_slope: f64,
    pub mean_slope: f64,
    pub discrepancy: f64,
    pub stderr: f64,
    pub z: f64,
}

/// Mean of per-replicate discrepancies with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledCheck {
    pub replicates: usize,
    pub mean_discrepancy: f64,
    pub stderr: f64,
    pub z: f64,
}

impl PooledCheck {
    pub fn from_discrepancies(d: &[f64]) -> Self {
        let (mean, se) = mean_and_se(d);
        PooledCheck {
            replicates: d.len(),
            mean_discrepancy: mean,
            stderr: se,
            z: z_score(mean, se),
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z.abs() <= sigmas
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub skewness: f64,
    pub skewness_se: f64,
    pub kurtosis: f64,
    pub kurtosis_se: f64,
    pub records: usize,
}

fn z_score(d: f64, se: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d / se
    }
}

fn window(
    records: &[TrajectoryRecord],
    burn_in_fraction: f64,
) -> Result<&[TrajectoryRecord], ExperimentError> {
    let w = post_burn_in(records, burn_in_fraction);
    if w.len() < MIN_RECORDS.max(2 * BATCHES) {
        return Err(ExperimentError::TooFewRecords {
            found: w.len(),
            needed: MIN_RECORDS.max(2 * BATCHES),
        });
    }
    Ok(w)
}

/// Splits `w` into contiguous batches that share their boundary record, so
/// batch increments add up to the whole-window increment.
fn batches(w: &[TrajectoryRecord]) -> impl Iterator<Item = &[TrajectoryRecord]> {
    let last = w.len() - 1;
    (0..BATCHES).map(move |b| &w[b * last / BATCHES..=(b + 1) * last / BATCHES])
}

fn slope<F: Fn(&TrajectoryRecord) -> f64>(w: &[TrajectoryRecord], f: F) -> f64 {
    let t: Vec<f64> = w.iter().map(|r| r.time).collect();
    let y: Vec<f64> = w.iter().map(f).collect();
    ols(&t, &y).0
}

fn increment_rate<F: Fn(&TrajectoryRecord) -> f64>(b: &[TrajectoryRecord], f: F) -> f64 {
    let (first, last) = (&b[0], &b[b.len() - 1]);
    (f(last) - f(first)) / (last.time - first.time)
}

/// Trapezoidal time average of `c2` over the records.
pub fn time_average_c2(w: &[TrajectoryRecord]) -> f64 {
    let span = w[w.len() - 1].time - w[0].time;
    let area: f64 = w
        .windows(2)
        .map(|p| 0.5 * (p[0].c2 + p[1].c2) * (p[1].time - p[0].time))
        .sum();
    area / span
}

/// Compares the slope of the mean fitness with `mu (2q - 1) + s <c2>`.
pub fn drift_identity_check(
    records: &[TrajectoryRecord],
    params: &Params,
    burn_in_fraction: f64,
) -> Result<DriftReport, ExperimentError> {
    let w = window(records, burn_in_fraction)?;
    let rate = slope(w, |r| r.mean_fitness);
    let mean_c2 = time_average_c2(w);
    let predicted = drift_rate(params, mean_c2);
    let per_batch: Vec<f64> = batches(w)
        .map(|b| increment_rate(b, |r| r.mean_fitness) - drift_rate(params, time_average_c2(b)))
        .collect();
    let (_, stderr) = mean_and_se(&per_batch);
    let discrepancy = rate - predicted;
    Ok(DriftReport {
        rate,
        mean_c2,
        predicted,
        discrepancy,
        stderr,
        z: z_score(discrepancy, stderr),
    })
}

/// Compares the slope of the front `k_c` with the slope of the mean.
pub fn front_speed_check(
    records: &[TrajectoryRecord],
    burn_in_fraction: f64,
) -> Result<FrontReport, ExperimentError> {
    let w = window(records, burn_in_fraction)?;
    if let Some(r) = w.iter().find(|r| r.k_c.is_none()) {
        return Err(ExperimentError::MissingFront { time: r.time });
    }
    let front = |r: &TrajectoryRecord| r.k_c.expect("checked above") as f64;
    let front_slope = slope(w, front);
    let mean_slope = slope(w, |r| r.mean_fitness);
    let per_batch: Vec<f64> = batches(w)
        .map(|b| increment_rate(b, front) - increment_rate(b, |r| r.mean_fitness))
        .collect();
    let (_, stderr) = mean_and_se(&per_batch);
    let discrepancy = front_slope - mean_slope;
    Ok(FrontReport {
        front_slope,
        mean_slope,
        discrepancy,
        stderr,
        z: z_score(discrepancy, stderr),
    })
}

/// Time-averaged skewness `c3 / c2^1.5` and kurtosis `c4 / c2^2` over
/// records with positive variance. `None` when no such record exists.
pub fn stationarity_diagnostics(
    records: &[TrajectoryRecord],
    burn_in_fraction: f64,
) -> Option<StationarityReport> {
    let shaped: Vec<(f64, f64)> = post_burn_in(records, burn_in_fraction)
        .iter()
        .filter(|r| r.c2 > 0.0)
        .map(|r| (r.c3 / r.c2.powf(1.5), r.c4 / (r.c2 * r.c2)))
        .collect();
    if shaped.is_empty() {
        return None;
    }
    let skew: Vec<f64> = shaped.iter().map(|p| p.0).collect();
    let kurt: Vec<f64> = shaped.iter().map(|p| p.1).collect();
    let (skewness, skewness_se) = batch_mean(&skew);
    let (kurtosis, kurtosis_se) = batch_mean(&kurt);
    Some(StationarityReport {
        skewness,
        skewness_se,
        kurtosis,
        kurtosis_se,
        records: shaped.len(),
    })
}

/// Overall mean and batch-means standard error; the error is NaN when there
/// are fewer values than batches.
fn batch_mean(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < BATCHES {
        return (mean, f64::NAN);
    }
    let n = values.len();
    let means: Vec<f64> = (0..BATCHES)
        .map(|b| {
            let chunk = &values[b * n / BATCHES..(b + 1) * n / BATCHES];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    (mean, mean_and_se(&means).1)
}
