//! Populations over integer fitness classes and the statistics computed on
//! them.
//!
//! A fitness class is the net number of beneficial minus deleterious
//! mutations carried by an individual. A [`Population`] stores only occupied
//! classes; every statistic here is a pure function of the occupancy counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised when constructing or querying populations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PopulationError {
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("mutation rate must be finite and nonnegative, got {0}")]
    InvalidMutationRate(f64),
    #[error("beneficial fraction q must lie in [0, 1], got {0}")]
    InvalidBeneficialFraction(f64),
    #[error("selection coefficient must be finite and nonnegative, got {0}")]
    InvalidSelection(f64),
    #[error("central moments are defined for n >= 2, got n = {0}")]
    MomentOrder(u32),
    #[error("front threshold exponent beta must lie in (0, 1), got {0}")]
    InvalidBeta(f64),
    #[error("individual state has {x} selected values but {y} neutral values")]
    ShadowLength { x: usize, y: usize },
    #[error("neutral value exceeds selected value at individual {0}")]
    ShadowNotDominated(usize),
}

/// Model parameters: population size, mutation rate, beneficial fraction and
/// selection coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub pop_size: u64,
    pub mu: f64,
    pub q: f64,
    pub s: f64,
}

impl Params {
    pub fn new(pop_size: u64, mu: f64, q: f64, s: f64) -> Result<Self, PopulationError> {
        let p = Params { pop_size, mu, q, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PopulationError> {
        if self.pop_size == 0 {
            return Err(PopulationError::EmptyPopulation);
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(PopulationError::InvalidMutationRate(self.mu));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(PopulationError::InvalidBeneficialFraction(self.q));
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(PopulationError::InvalidSelection(self.s));
        }
        Ok(())
    }

    /// Net mutational drift of the mean, `mu * (2q - 1)`.
    pub fn mutational_drift(&self) -> f64 {
        self.mu * (2.0 * self.q - 1.0)
    }
}

/// Occupancy counts over fitness classes. Zero-occupancy classes are never
/// stored and the counts always sum to `total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl Population {
    /// Builds a population from `(class, count)` pairs. Repeated classes are
    /// merged and zero counts dropped.
    pub fn from_counts<I>(pairs: I) -> Result<Self, PopulationError>
    where
        I: IntoIterator<Item = (i64, u64)>,
    {
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for (class, count) in pairs {
            if count == 0 {
                continue;
            }
            *counts.entry(class).or_insert(0) += count;
            total += count;
        }
        if total == 0 {
            return Err(PopulationError::EmptyPopulation);
        }
        Ok(Population { counts, total })
    }

    pub fn point_mass(class: i64, pop_size: u64) -> Result<Self, PopulationError> {
        Self::from_counts([(class, pop_size)])
    }

    /// Histogram of a vector of individual fitness values.
    pub fn from_values(values: &[i64]) -> Result<Self, PopulationError> {
        Self::from_counts(values.iter().map(|&v| (v, 1)))
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, class: i64) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    /// Occupied classes in increasing order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (i64, u64)> + Clone + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// Proportion of the population in class `k`.
    pub fn proportion(&self, class: i64) -> f64 {
        self.count(class) as f64 / self.total as f64
    }

    /// Proportion of the population with fitness in `[lo, hi]`.
    pub fn range_proportion(&self, lo: i64, hi: i64) -> f64 {
        if lo > hi {
            return 0.0;
        }
        let n: u64 = self.counts.range(lo..=hi).map(|(_, &c)| c).sum();
        n as f64 / self.total as f64
    }

    pub fn min_class(&self) -> i64 {
        *self.counts.keys().next().expect("population is nonempty")
    }

    pub fn max_class(&self) -> i64 {
        *self
            .counts
            .keys()
            .next_back()
            .expect("population is nonempty")
    }

    /// Shifts every class by `offset`.
    pub fn shifted(&self, offset: i64) -> Population {
        Population {
            counts: self.counts.iter().map(|(&k, &c)| (k + offset, c)).collect(),
            total: self.total,
        }
    }
}

/// Per-individual fitness values, optionally paired with a neutral shadow
/// that shares the mutation and resampling events but not selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndividualState {
    pub x: Vec<i64>,
    pub y: Option<Vec<i64>>,
}

impl IndividualState {
    pub fn new(x: Vec<i64>) -> Self {
        IndividualState { x, y: None }
    }

    /// State whose neutral shadow starts as a copy of the selected values.
    pub fn coupled(x: Vec<i64>) -> Self {
        let y = Some(x.clone());
        IndividualState { x, y }
    }

    /// Checks `y_i <= x_i` for every individual.
    pub fn validate(&self) -> Result<(), PopulationError> {
        if self.x.is_empty() {
            return Err(PopulationError::EmptyPopulation);
        }
        if let Some(y) = &self.y {
            if y.len() != self.x.len() {
                return Err(PopulationError::ShadowLength {
                    x: self.x.len(),
                    y: y.len(),
                });
            }
            if let Some(i) = self.x.iter().zip(y).position(|(xi, yi)| yi > xi) {
                return Err(PopulationError::ShadowNotDominated(i));
            }
        }
        Ok(())
    }

    pub fn population(&self) -> Population {
        Population::from_values(&self.x).expect("nonempty individual state")
    }
}

/// Time-stamped summary statistics of the population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub mean_fitness: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub k_c: Option<i64>,
    pub k_d: Option<i64>,
    pub k_w: u64,
    pub min_class: i64,
    pub max_class: i64,
}

/// Default exponent for the k_d threshold `exp((ln N)^(1 - beta))`.
pub const DEFAULT_KD_BETA: f64 = 0.5;

pub fn mean_fitness(p: &Population) -> f64 {
    mean_of(p.iter(), p.total)
}

/// `n`-th central moment, `sum_k (k - m)^n p_k`.
pub fn central_moment(p: &Population, n: u32) -> Result<f64, PopulationError> {
    if n < 2 {
        return Err(PopulationError::MomentOrder(n));
    }
    let m = mean_fitness(p);
    Ok(moment_about(p.iter(), p.total, m, n))
}

/// The wave front: largest `k` with strictly more than `(ln N)^2` individuals
/// at fitness `>= k`. Absent when the threshold is at least `N`.
pub fn front_kc(p: &Population) -> Option<i64> {
    largest_above(p.iter(), kc_threshold(p.total))
}

/// Largest `k` with strictly more than `exp((ln N)^(1 - beta))` individuals
/// at fitness `>= k`. Absent for `N < 3` or when the threshold is at least `N`.
pub fn front_kd(p: &Population, beta: f64) -> Result<Option<i64>, PopulationError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(PopulationError::InvalidBeta(beta));
    }
    Ok(kd_threshold(p.total, beta).and_then(|t| largest_above(p.iter(), t)))
}

pub fn support_width(p: &Population) -> u64 {
    (p.max_class() - p.min_class()) as u64
}

pub fn kc_threshold(pop_size: u64) -> f64 {
    let l = (pop_size as f64).ln();
    l * l
}

pub fn kd_threshold(pop_size: u64, beta: f64) -> Option<f64> {
    if pop_size < 3 {
        return None;
    }
    Some((pop_size as f64).ln().powf(1.0 - beta).exp())
}

pub fn record(p: &Population, time: f64, kd_beta: f64) -> TrajectoryRecord {
    summarize(p.iter(), p.total, time, kd_beta)
}

/// Builds a record from occupied classes in increasing order. Shared with the
/// simulation engines, which keep their own dense histograms.
pub(crate) fn summarize<I>(classes: I, total: u64, time: f64, kd_beta: f64) -> TrajectoryRecord
where
    I: DoubleEndedIterator<Item = (i64, u64)> + Clone,
{
    let m = mean_of(classes.clone(), total);
    let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
    for (k, c) in classes.clone() {
        let d = k as f64 - m;
        let d2 = d * d;
        let w = c as f64;
        c2 += d2 * w;
        c3 += d2 * d * w;
        c4 += d2 * d2 * w;
    }
    let n = total as f64;
    let min_class = classes.clone().next().map(|(k, _)| k).unwrap_or(0);
    let max_class = classes.clone().next_back().map(|(k, _)| k).unwrap_or(0);
    TrajectoryRecord {
        time,
        mean_fitness: m,
        c2: c2 / n,
        c3: c3 / n,
        c4: c4 / n,
        k_c: largest_above(classes.clone(), kc_threshold(total)),
        k_d: kd_threshold(total, kd_beta).and_then(|t| largest_above(classes, t)),
        k_w: (max_class - min_class) as u64,
        min_class,
        max_class,
    }
}

fn mean_of<I: Iterator<Item = (i64, u64)>>(classes: I, total: u64) -> f64 {
    let sum: f64 = classes.map(|(k, c)| k as f64 * c as f64).sum();
    sum / total as f64
}

fn moment_about<I: Iterator<Item = (i64, u64)>>(classes: I, total: u64, m: f64, n: u32) -> f64 {
    let sum: f64 = classes
        .map(|(k, c)| (k as f64 - m).powi(n as i32) * c as f64)
        .sum();
    sum / total as f64
}

fn largest_above<I>(classes: I, threshold: f64) -> Option<i64>
where
    I: DoubleEndedIterator<Item = (i64, u64)>,
{
    let mut tail = 0u64;
    for (k, c) in classes.rev() {
        tail += c;
        if tail as f64 > threshold {
            return Some(k);
        }
    }
    None
}
