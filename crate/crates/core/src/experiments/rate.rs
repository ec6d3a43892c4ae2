use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::population::TrajectoryRecord;

/// Minimum number of post-burn-in records for a slope estimate.
pub const MIN_RECORDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub records: usize,
}

/// Records at or after `burn_in_fraction` of the final record time.
pub fn post_burn_in(records: &[TrajectoryRecord], burn_in_fraction: f64) -> &[TrajectoryRecord] {
    let Some(last) = records.last() else {
        return records;
    };
    let cutoff = burn_in_fraction * last.time;
    let start = records.partition_point(|r| r.time < cutoff);
    &records[start..]
}

/// Least-squares line through `(x, y)`: slope, intercept and the usual
/// slope standard error `sqrt(SSR / (n - 2) / Sxx)`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, se)
}

/// Coefficient of determination of the least-squares line.
pub fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let (slope, intercept, _) = ols(xs, ys);
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sst: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    1.0 - ssr / sst
}

/// OLS slope of the mean fitness against time after burn-in.
pub fn estimate_adaptation_rate(
    records: &[TrajectoryRecord],
    burn_in_fraction: f64,
) -> Result<RateEstimate, ExperimentError> {
    let window = post_burn_in(records, burn_in_fraction);
    if window.len() < MIN_RECORDS {
        return Err(ExperimentError::TooFewRecords {
            found: window.len(),
            needed: MIN_RECORDS,
        });
    }
    let t: Vec<f64> = window.iter().map(|r| r.time).collect();
    let m: Vec<f64> = window.iter().map(|r| r.mean_fitness).collect();
    let (rate, _, stderr) = ols(&t, &m);
    Ok(RateEstimate {
        rate,
        stderr: if stderr.is_finite() {
            stderr.max(0.0)
        } else {
            0.0
        },
        records: window.len(),
    })
}

/// Mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn sample_sd(values: &[f64]) -> f64 {
    let (_, se) = mean_and_se(values);
    se * (values.len() as f64).sqrt()
}
