//! Individual-level simulation, with an optional neutral shadow.
//!
//! Mutation fires at rate `mu` per individual. Every ordered pair `(i, j)`
//! resamples at rate `1 / N`, with `i` replacing `j`. Selection of `i` over
//! `j` at rate `(s / N)(X_i - X_j)^+` is realized by thinning: candidate
//! pairs arrive at total rate `s k_w N` and are accepted with probability
//! `(X_i - X_j)^+ / k_w`, where `k_w` is the current support width. The
//! bound is re-read before every draw, so it always dominates.
//!
//! In coupled mode the shadow `Y` receives the same mutation draws (same
//! individual, same direction) and the same resampling pairs, and no
//! selection. Starting from `Y = X` this keeps `Y_i <= X_i` for every `i`;
//! the engine checks the touched individual after every event.

use rand::Rng;

use super::histogram::Histogram;
use super::{drive, Engine, EventCounts, EventKind, SimConfig, SimError, SimMode};
use crate::population::{IndividualState, Params, TrajectoryRecord};
use crate::rng::{sim_rng, SimRng};

pub struct IndividualEngine {
    params: Params,
    kd_beta: f64,
    x: Vec<i64>,
    hx: Histogram,
    shadow: Option<(Vec<i64>, Histogram)>,
    counts: EventCounts,
}

#[derive(Debug, Clone)]
pub struct IndividualRun {
    pub records: Vec<TrajectoryRecord>,
    pub final_state: IndividualState,
    pub events: EventCounts,
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    /// `(selected, neutral)` record pairs at each record time.
    pub records: Vec<(TrajectoryRecord, TrajectoryRecord)>,
    pub final_state: IndividualState,
    pub events: EventCounts,
}

impl IndividualEngine {
    pub fn new(params: Params, initial: &IndividualState, kd_beta: f64) -> Result<Self, SimError> {
        params.validate()?;
        initial.validate()?;
        if initial.x.len() as u64 != params.pop_size {
            return Err(SimError::SizeMismatch {
                expected: params.pop_size,
                found: initial.x.len() as u64,
            });
        }
        Ok(IndividualEngine {
            params,
            kd_beta,
            x: initial.x.clone(),
            hx: Histogram::from_values(&initial.x),
            shadow: initial
                .y
                .as_ref()
                .map(|y| (y.clone(), Histogram::from_values(y))),
            counts: EventCounts::default(),
        })
    }

    pub fn x(&self) -> &[i64] {
        &self.x
    }

    pub fn y(&self) -> Option<&[i64]> {
        self.shadow.as_ref().map(|(y, _)| y.as_slice())
    }

    pub fn support_width(&self) -> u64 {
        self.hx.width()
    }

    pub fn mean_fitness(&self) -> f64 {
        self.x.iter().map(|&v| v as f64).sum::<f64>() / self.x.len() as f64
    }

    pub fn state(&self) -> IndividualState {
        IndividualState {
            x: self.x.clone(),
            y: self.y().map(<[i64]>::to_vec),
        }
    }

    fn random_index(&self, rng: &mut SimRng) -> usize {
        rng.random_range(0..self.x.len())
    }

    fn set_x(&mut self, i: usize, v: i64) {
        self.hx.shift(self.x[i], v);
        self.x[i] = v;
    }

    fn check(&self, i: usize, time: f64) -> Result<(), SimError> {
        match &self.shadow {
            Some((y, _)) if y[i] > self.x[i] => Err(SimError::DominationViolated {
                index: i,
                time,
                x: self.x[i],
                y: y[i],
            }),
            _ => Ok(()),
        }
    }
}

impl Engine for IndividualEngine {
    type Site = usize;
    type Record = (TrajectoryRecord, Option<TrajectoryRecord>);

    fn total_rate(&self) -> f64 {
        let n = self.params.pop_size as f64;
        self.params.mu * n + n + self.params.s * self.hx.width() as f64 * n
    }

    fn fire(&mut self, rng: &mut SimRng, time: f64) -> Result<Option<EventKind<usize>>, SimError> {
        let n = self.params.pop_size as f64;
        let mutation = self.params.mu * n;
        let u = rng.random::<f64>() * self.total_rate();
        let kw = self.hx.width();
        if u < mutation {
            let i = self.random_index(rng);
            let step = if rng.random_bool(self.params.q) {
                1
            } else {
                -1
            };
            self.set_x(i, self.x[i] + step);
            if let Some((y, hy)) = &mut self.shadow {
                hy.shift(y[i], y[i] + step);
                y[i] += step;
            }
            self.check(i, time)?;
            return Ok(Some(if step > 0 {
                self.counts.mutation_up += 1;
                EventKind::MutationUp { site: i }
            } else {
                self.counts.mutation_down += 1;
                EventKind::MutationDown { site: i }
            }));
        }
        let source = self.random_index(rng);
        let target = self.random_index(rng);
        if u < mutation + n || kw == 0 {
            if source == target {
                self.counts.resampling_noop += 1;
            } else {
                self.set_x(target, self.x[source]);
                if let Some((y, hy)) = &mut self.shadow {
                    hy.shift(y[target], y[source]);
                    y[target] = y[source];
                }
                self.counts.resampling += 1;
                self.check(target, time)?;
            }
            return Ok(Some(EventKind::Resampling { source, target }));
        }
        let gap = self.x[source] - self.x[target];
        if gap > 0 && rng.random_range(0..kw) < gap as u64 {
            self.set_x(target, self.x[source]);
            self.counts.selection += 1;
            self.check(target, time)?;
            Ok(Some(EventKind::Selection { source, target }))
        } else {
            self.counts.selection_rejected += 1;
            Ok(None)
        }
    }

    fn snapshot(&self, time: f64) -> Self::Record {
        (
            self.hx.record(time, self.kd_beta),
            self.shadow
                .as_ref()
                .map(|(_, hy)| hy.record(time, self.kd_beta)),
        )
    }
}

pub fn simulate_individuals(
    cfg: &SimConfig,
    initial: &IndividualState,
) -> Result<IndividualRun, SimError> {
    simulate_individuals_observed(cfg, initial, |_, _, _| {})
}

pub fn simulate_individuals_observed<F>(
    cfg: &SimConfig,
    initial: &IndividualState,
    observe: F,
) -> Result<IndividualRun, SimError>
where
    F: FnMut(f64, &EventKind<usize>, &IndividualEngine),
{
    cfg.validate()?;
    cfg.expect_mode(SimMode::IndividualLevel)?;
    let plain = IndividualState::new(initial.x.clone());
    let mut engine = IndividualEngine::new(cfg.params, &plain, cfg.kd_beta)?;
    let mut rng = sim_rng(cfg.seed);
    let records = drive(&mut engine, &mut rng, cfg, observe)?;
    Ok(IndividualRun {
        records: records.into_iter().map(|(r, _)| r).collect(),
        final_state: engine.state(),
        events: engine.counts,
    })
}

/// Runs the selected population and its neutral shadow on shared mutation
/// and resampling events. Requires `initial.y == Some(initial.x)`.
pub fn simulate_coupled(
    cfg: &SimConfig,
    initial: &IndividualState,
) -> Result<CoupledRun, SimError> {
    cfg.validate()?;
    cfg.expect_mode(SimMode::CoupledNeutral)?;
    if initial.y.as_deref() != Some(initial.x.as_slice()) {
        return Err(SimError::Config(
            "coupled runs start with the shadow equal to the selected state".into(),
        ));
    }
    let mut engine = IndividualEngine::new(cfg.params, initial, cfg.kd_beta)?;
    let mut rng = sim_rng(cfg.seed);
    let records = drive(&mut engine, &mut rng, cfg, |_, _, _| {})?;
    Ok(CoupledRun {
        records: records
            .into_iter()
            .map(|(x, y)| (x, y.expect("coupled engine records the shadow")))
            .collect(),
        final_state: engine.state(),
        events: engine.counts,
    })
}
