//! Experiment drivers built on the simulators: adaptation-rate estimation,
//! parameter sweeps, consistency checks between simulation and theory, and
//! an exact oracle for very small populations.

mod checks;
mod oracle;
mod rate;
mod sweep;
pub mod validation;

use thiserror::Error;

use crate::population::PopulationError;
use crate::sim::SimError;
use crate::theory::TheoryError;

pub use checks::{
    drift_identity_check, front_speed_check, stationarity_diagnostics, time_average_c2,
    DriftReport, FrontReport, PooledCheck, StationarityReport, BATCHES,
};
pub use oracle::{
    absorption_probability, empirical_distribution, exact_distribution, small_instance_oracle,
    total_variation, MultisetState, OracleReport,
};
pub use rate::{
    estimate_adaptation_rate, mean_and_se, ols, post_burn_in, r_squared, sample_sd, RateEstimate,
    MIN_RECORDS,
};
pub use sweep::{
    map_cells, run_sweep, GridSummary, SweepCell, SweepConfig, SweepResult, SweepRow,
    DEFAULT_BURN_IN_FRACTION,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("need at least {needed} records after burn-in, found {found}")]
    TooFewRecords { found: usize, needed: usize },
    #[error("front k_c is undefined at time {time}")]
    MissingFront { time: f64 },
    #[error(transparent)]
    Params(#[from] PopulationError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::population::TrajectoryRecord;

    /// Records with a Gaussian shape (`c2 = 1`, `c4 = 3`) and the given
    /// `(time, mean)` pairs.
    pub fn synthetic(points: &[(f64, f64)]) -> Vec<TrajectoryRecord> {
        points
            .iter()
            .map(|&(time, m)| TrajectoryRecord {
                time,
                mean_fitness: m,
                c2: 1.0,
                c3: 0.0,
                c4: 3.0,
                k_c: Some(m.round() as i64 + 3),
                k_d: None,
                k_w: 4,
                min_class: m.round() as i64 - 2,
                max_class: m.round() as i64 + 2,
            })
            .collect()
    }
}
