//! Exact continuous-time simulation engines.
//!
//! Three engines share one driver loop ([`drive`]): the class-level engine
//! tracks only occupancy counts and is the one used for sweeps; the
//! individual-level engine tracks each individual's fitness and realizes
//! selection by thinning; the coupled engine runs a neutral shadow beside the
//! selected population on the same mutation and resampling events. The
//! linear birth-death chain lives in [`birth_death`].

mod birth_death;
mod classes;
mod histogram;
mod individuals;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::population::{Params, PopulationError, DEFAULT_KD_BETA};
use crate::rng::{exp_wait, SimRng};

pub use birth_death::{
    birth_death_terminal, simulate_birth_death, BirthDeathConfig, BirthDeathEvent,
    BirthDeathOutcome,
};
pub use classes::{simulate_classes, simulate_classes_observed, ClassEngine, ClassRun};
pub use individuals::{
    simulate_coupled, simulate_individuals, simulate_individuals_observed, CoupledRun,
    IndividualEngine, IndividualRun,
};

/// Default hard cap on events per run.
pub const DEFAULT_MAX_EVENTS: u64 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    ClassLevel,
    IndividualLevel,
    CoupledNeutral,
}

impl std::str::FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "class_level" | "class" => Ok(SimMode::ClassLevel),
            "individual_level" | "individual" => Ok(SimMode::IndividualLevel),
            "coupled_neutral" | "coupled" => Ok(SimMode::CoupledNeutral),
            other => Err(format!("unknown simulation mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: Params,
    pub horizon: f64,
    pub record_interval: f64,
    pub seed: u64,
    pub mode: SimMode,
    /// Exponent in the k_d threshold `exp((ln N)^(1 - beta))`.
    #[serde(default = "default_kd_beta")]
    pub kd_beta: f64,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
}

fn default_kd_beta() -> f64 {
    DEFAULT_KD_BETA
}

fn default_max_events() -> u64 {
    DEFAULT_MAX_EVENTS
}

impl SimConfig {
    pub fn new(
        params: Params,
        horizon: f64,
        record_interval: f64,
        seed: u64,
        mode: SimMode,
    ) -> Self {
        SimConfig {
            params,
            horizon,
            record_interval,
            seed,
            mode,
            kd_beta: DEFAULT_KD_BETA,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params.validate()?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(SimError::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.record_interval.is_finite() && self.record_interval > 0.0) {
            return Err(SimError::Config(format!(
                "record interval must be positive, got {}",
                self.record_interval
            )));
        }
        if self.record_interval > self.horizon {
            return Err(SimError::Config(format!(
                "record interval {} exceeds horizon {}",
                self.record_interval, self.horizon
            )));
        }
        if !(self.kd_beta > 0.0 && self.kd_beta < 1.0) {
            return Err(PopulationError::InvalidBeta(self.kd_beta).into());
        }
        Ok(())
    }

    fn expect_mode(&self, mode: SimMode) -> Result<(), SimError> {
        if self.mode != mode {
            return Err(SimError::ModeMismatch {
                expected: mode,
                found: self.mode,
            });
        }
        Ok(())
    }

    /// Record times `0, dt, 2 dt, ...` up to and including the horizon.
    pub fn record_times(&self) -> impl Iterator<Item = f64> {
        let dt = self.record_interval;
        let n = (self.horizon / dt * (1.0 + 1e-12)).floor() as u64;
        (0..=n).map(move |i| i as f64 * dt)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    Params(#[from] PopulationError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("engine for {expected:?} called with mode {found:?}")]
    ModeMismatch { expected: SimMode, found: SimMode },
    #[error("initial population has {found} individuals, parameters say {expected}")]
    SizeMismatch { expected: u64, found: u64 },
    #[error("event budget of {limit} events exceeded at time {time}")]
    BudgetExceeded { limit: u64, time: f64 },
    #[error("coupling violated at individual {index}, time {time}: neutral {y} > selected {x}")]
    DominationViolated {
        index: usize,
        time: f64,
        x: i64,
        y: i64,
    },
}

/// One realized transition. `S` is a class (class-level engine) or an
/// individual index (individual-level engines).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind<S> {
    MutationUp {
        site: S,
    },
    MutationDown {
        site: S,
    },
    /// `source` replaces `target`; the source is strictly fitter.
    Selection {
        source: S,
        target: S,
    },
    /// `source` replaces `target`. Equal sites (class level) or equal values
    /// leave the state unchanged.
    Resampling {
        source: S,
        target: S,
    },
}

/// Counts of events fired during a run, by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub mutation_up: u64,
    pub mutation_down: u64,
    pub selection: u64,
    pub resampling: u64,
    /// Resampling draws that hit the same class (class level) or the same
    /// individual (individual level) and changed nothing.
    pub resampling_noop: u64,
    /// Thinned selection proposals that were rejected (individual level).
    pub selection_rejected: u64,
}

impl EventCounts {
    pub fn total(&self) -> u64 {
        self.mutation_up
            + self.mutation_down
            + self.selection
            + self.resampling
            + self.resampling_noop
            + self.selection_rejected
    }
}

/// What the driver needs from an engine.
pub(crate) trait Engine {
    type Site;
    type Record;

    fn total_rate(&self) -> f64;
    /// Fires one event drawn from the current rates. `None` means a thinned
    /// proposal was rejected.
    fn fire(
        &mut self,
        rng: &mut SimRng,
        time: f64,
    ) -> Result<Option<EventKind<Self::Site>>, SimError>;
    fn snapshot(&self, time: f64) -> Self::Record;
}

/// Runs an engine to the horizon, emitting a snapshot at each record time
/// from the state left by the last event at or before it.
pub(crate) fn drive<E, F>(
    engine: &mut E,
    rng: &mut SimRng,
    cfg: &SimConfig,
    mut observe: F,
) -> Result<Vec<E::Record>, SimError>
where
    E: Engine,
    F: FnMut(f64, &EventKind<E::Site>, &E),
{
    let mut grid = cfg.record_times().peekable();
    let mut records = Vec::new();
    let mut time = 0.0;
    let mut events = 0u64;
    loop {
        let rate = engine.total_rate();
        let next = if rate > 0.0 {
            time + exp_wait(rng, rate)
        } else {
            f64::INFINITY
        };
        while let Some(&g) = grid.peek() {
            if g >= next {
                break;
            }
            records.push(engine.snapshot(g));
            grid.next();
        }
        if grid.peek().is_none() {
            return Ok(records);
        }
        events += 1;
        if events > cfg.max_events {
            return Err(SimError::BudgetExceeded {
                limit: cfg.max_events,
                time: next,
            });
        }
        time = next;
        if let Some(ev) = engine.fire(rng, time)? {
            observe(time, &ev, engine);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params::new(10, 0.1, 0.5, 0.1).unwrap()
    }

    #[test]
    fn record_times_include_horizon() {
        let cfg = SimConfig::new(params(), 1.0, 0.1, 0, SimMode::ClassLevel);
        let t: Vec<f64> = cfg.record_times().collect();
        assert_eq!(t.len(), 11);
        assert!((t[10] - 1.0).abs() < 1e-12);
        let cfg = SimConfig::new(params(), 1.05, 0.5, 0, SimMode::ClassLevel);
        assert_eq!(cfg.record_times().count(), 3);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(params(), 1.0, 2.0, 0, SimMode::ClassLevel)
            .validate()
            .is_err());
        assert!(SimConfig::new(params(), 0.0, 0.0, 0, SimMode::ClassLevel)
            .validate()
            .is_err());
        assert!(SimConfig::new(params(), 1.0, 1.0, 0, SimMode::ClassLevel)
            .validate()
            .is_ok());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(
            "class_level".parse::<SimMode>().unwrap(),
            SimMode::ClassLevel
        );
        assert_eq!(
            "coupled".parse::<SimMode>().unwrap(),
            SimMode::CoupledNeutral
        );
        assert!("quantum".parse::<SimMode>().is_err());
    }
}
