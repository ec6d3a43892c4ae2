//! Class-level stochastic simulation.
//!
//! The state is the occupancy histogram. Total rates are `mu N` for
//! mutation, `N` for resampling over ordered class pairs drawn with
//! probability `P_k P_l` (same-class draws are no-ops), and
//! `(s / N) sum_{k > l} (k - l) n_k n_l` for selection. The selection sum is
//! rebuilt after every event from running prefix sums in `O(W)`, where `W`
//! is the support width; all selection weights are exact integers.

use rand::Rng;

use super::histogram::Histogram;
use super::{drive, Engine, EventCounts, EventKind, SimConfig, SimError, SimMode};
use crate::population::{Params, Population, TrajectoryRecord};
use crate::rng::{sim_rng, SimRng};

pub struct ClassEngine {
    params: Params,
    kd_beta: f64,
    hist: Histogram,
    /// `n_k * sum_{l < k} (k - l) n_l` per window cell.
    sel_weights: Vec<u128>,
    sel_total: u128,
    counts: EventCounts,
}

#[derive(Debug, Clone)]
pub struct ClassRun {
    pub records: Vec<TrajectoryRecord>,
    pub final_population: Population,
    pub events: EventCounts,
}

impl ClassEngine {
    pub fn new(params: Params, initial: &Population, kd_beta: f64) -> Result<Self, SimError> {
        params.validate()?;
        if initial.total() != params.pop_size {
            return Err(SimError::SizeMismatch {
                expected: params.pop_size,
                found: initial.total(),
            });
        }
        let mut engine = ClassEngine {
            params,
            kd_beta,
            hist: Histogram::from_population(initial),
            sel_weights: Vec::new(),
            sel_total: 0,
            counts: EventCounts::default(),
        };
        engine.refresh_selection();
        Ok(engine)
    }

    pub fn population(&self) -> Population {
        self.hist.to_population()
    }

    pub fn mean_fitness(&self) -> f64 {
        let n = self.params.pop_size as f64;
        self.hist
            .iter()
            .map(|(k, c)| k as f64 * c as f64)
            .sum::<f64>()
            / n
    }

    pub fn support_width(&self) -> u64 {
        self.hist.width()
    }

    pub fn event_counts(&self) -> EventCounts {
        self.counts
    }

    /// Current total selection rate.
    pub fn selection_rate(&self) -> f64 {
        self.params.s * self.sel_total as f64 / self.params.pop_size as f64
    }

    fn refresh_selection(&mut self) {
        self.sel_weights.clear();
        let (mut below, mut weighted_below, mut total) = (0u128, 0u128, 0u128);
        for (i, &c) in self.hist.counts().iter().enumerate() {
            let c = c as u128;
            let w = c * (i as u128 * below - weighted_below);
            self.sel_weights.push(w);
            total += w;
            below += c;
            weighted_below += i as u128 * c;
        }
        self.sel_total = total;
    }

    fn random_cell(&self, rng: &mut SimRng) -> usize {
        self.hist.locate(rng.random_range(0..self.params.pop_size))
    }

    fn class_of(&self, idx: usize) -> i64 {
        self.hist.base() + idx as i64
    }

    fn fire_selection(&mut self, rng: &mut SimRng) -> EventKind<i64> {
        let mut r = rng.random_range(0..self.sel_total);
        let src = self
            .sel_weights
            .iter()
            .position(|&w| {
                if r < w {
                    true
                } else {
                    r -= w;
                    false
                }
            })
            .expect("selection weights sum to total");
        let counts = self.hist.counts();
        let span: u128 = counts[..src]
            .iter()
            .enumerate()
            .map(|(j, &c)| (src - j) as u128 * c as u128)
            .sum();
        let mut r = rng.random_range(0..span);
        let mut tgt = 0;
        for (j, &c) in counts[..src].iter().enumerate() {
            let w = (src - j) as u128 * c as u128;
            if r < w {
                tgt = j;
                break;
            }
            r -= w;
        }
        let (source, target) = (self.class_of(src), self.class_of(tgt));
        self.hist.shift(target, source);
        self.counts.selection += 1;
        EventKind::Selection { source, target }
    }
}

impl Engine for ClassEngine {
    type Site = i64;
    type Record = TrajectoryRecord;

    fn total_rate(&self) -> f64 {
        let n = self.params.pop_size as f64;
        self.params.mu * n + n + self.selection_rate()
    }

    fn fire(&mut self, rng: &mut SimRng, _time: f64) -> Result<Option<EventKind<i64>>, SimError> {
        let n = self.params.pop_size as f64;
        let mutation = self.params.mu * n;
        let u = rng.random::<f64>() * self.total_rate();
        let event = if u < mutation {
            let class = self.class_of(self.random_cell(rng));
            if rng.random_bool(self.params.q) {
                self.hist.shift(class, class + 1);
                self.counts.mutation_up += 1;
                EventKind::MutationUp { site: class }
            } else {
                self.hist.shift(class, class - 1);
                self.counts.mutation_down += 1;
                EventKind::MutationDown { site: class }
            }
        } else if u < mutation + n || self.sel_total == 0 {
            let source = self.class_of(self.random_cell(rng));
            let target = self.class_of(self.random_cell(rng));
            if source == target {
                self.counts.resampling_noop += 1;
            } else {
                self.hist.shift(target, source);
                self.counts.resampling += 1;
            }
            EventKind::Resampling { source, target }
        } else {
            self.fire_selection(rng)
        };
        self.refresh_selection();
        Ok(Some(event))
    }

    fn snapshot(&self, time: f64) -> TrajectoryRecord {
        self.hist.record(time, self.kd_beta)
    }
}

/// Runs the class-level engine from `initial` to `cfg.horizon`.
pub fn simulate_classes(cfg: &SimConfig, initial: &Population) -> Result<ClassRun, SimError> {
    simulate_classes_observed(cfg, initial, |_, _, _| {})
}

/// As [`simulate_classes`], calling `observe` after every state-changing
/// event (and after same-class resampling draws) with the engine state.
pub fn simulate_classes_observed<F>(
    cfg: &SimConfig,
    initial: &Population,
    observe: F,
) -> Result<ClassRun, SimError>
where
    F: FnMut(f64, &EventKind<i64>, &ClassEngine),
{
    cfg.validate()?;
    cfg.expect_mode(SimMode::ClassLevel)?;
    let mut engine = ClassEngine::new(cfg.params, initial, cfg.kd_beta)?;
    let mut rng = sim_rng(cfg.seed);
    let records = drive(&mut engine, &mut rng, cfg, observe)?;
    Ok(ClassRun {
        records,
        final_population: engine.population(),
        events: engine.counts,
    })
}
