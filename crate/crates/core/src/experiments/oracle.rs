//! Exact transient law of the mutation-free chain for tiny populations.
//!
//! With `mu = 0` fitness values are only ever copied, so starting from the
//! distinct values `0..N` the state is a multiset drawn from that set. For
//! `N <= 3` there are at most ten such states and the time-`t` law follows
//! from uniformization of the generator.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::population::{Params, Population};
use crate::rng::stream_seed;
use crate::sim::{simulate_classes, SimConfig, SimMode};

/// Sorted individual values.
pub type MultisetState = Vec<i64>;

/// Poisson mass left out of the uniformization sum.
const TRUNCATION: f64 = 1e-12;
/// Largest `Lambda * dt` handled in one uniformization step; keeps
/// `exp(-Lambda dt)` far from underflow.
const MAX_CHUNK: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub state: MultisetState,
    pub exact: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub pop_size: u64,
    pub s: f64,
    pub t: f64,
    pub replicates: u32,
    pub rows: Vec<OracleRow>,
    pub total_variation: f64,
}

fn check_instance(pop_size: u64, s: f64) -> Result<(), ExperimentError> {
    if !(2..=3).contains(&pop_size) {
        return Err(ExperimentError::Config(format!(
            "oracle supports N in {{2, 3}}, got {pop_size}"
        )));
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(ExperimentError::Config(format!(
            "selection must be nonnegative, got {s}"
        )));
    }
    Ok(())
}

/// All multisets of size `n` over `0..n`, in lexicographic order.
fn states(n: u64) -> Vec<MultisetState> {
    fn grow(prefix: &mut Vec<i64>, n: usize, out: &mut Vec<MultisetState>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let from = prefix.last().copied().unwrap_or(0);
        for v in from..n as i64 {
            prefix.push(v);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n as usize, &mut out);
    out
}

/// Off-diagonal generator entries `(from, to, rate)`. Source class `k`
/// replaces target class `l` at rate `n_k n_l / N` by resampling plus
/// `s (k - l) n_k n_l / N` by selection when `k > l`.
fn transitions(states: &[MultisetState], n: u64, s: f64) -> Vec<(usize, usize, f64)> {
    let index: BTreeMap<&MultisetState, usize> =
        states.iter().enumerate().map(|(i, st)| (st, i)).collect();
    let nf = n as f64;
    let mut out = Vec::new();
    for (i, st) in states.iter().enumerate() {
        let counts = Population::from_values(st).expect("nonempty");
        for (k, nk) in counts.iter() {
            for (l, nl) in counts.iter() {
                if k == l {
                    continue;
                }
                let mut rate = (nk * nl) as f64 / nf;
                if k > l {
                    rate += s * (k - l) as f64 * (nk * nl) as f64 / nf;
                }
                let mut next = st.clone();
                let pos = next.iter().position(|&v| v == l).expect("target present");
                next[pos] = k;
                next.sort_unstable();
                out.push((i, index[&next], rate));
            }
        }
    }
    out
}

/// Exact law at time `t` starting from `{0, 1, ..., N-1}`.
pub fn exact_distribution(
    pop_size: u64,
    s: f64,
    t: f64,
) -> Result<Vec<(MultisetState, f64)>, ExperimentError> {
    check_instance(pop_size, s)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(ExperimentError::Config(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let sts = states(pop_size);
    let moves = transitions(&sts, pop_size, s);
    let mut exit = vec![0.0; sts.len()];
    for &(i, _, r) in &moves {
        exit[i] += r;
    }
    let lambda = exit.iter().cloned().fold(0.0, f64::max);
    let initial: MultisetState = (0..pop_size as i64).collect();
    let mut p = vec![0.0; sts.len()];
    p[sts
        .iter()
        .position(|st| *st == initial)
        .expect("initial state enumerated")] = 1.0;
    if lambda == 0.0 || t == 0.0 {
        return Ok(sts.into_iter().zip(p).collect());
    }

    // One step of the uniformized chain: v -> v (I + Q / lambda).
    let step = |v: &[f64]| {
        let mut w: Vec<f64> = v
            .iter()
            .zip(&exit)
            .map(|(x, e)| x * (1.0 - e / lambda))
            .collect();
        for &(i, j, r) in &moves {
            w[j] += v[i] * r / lambda;
        }
        w
    };
    let chunks = (lambda * t / MAX_CHUNK).ceil().max(1.0);
    let dt = t / chunks;
    for _ in 0..chunks as u64 {
        let rate = lambda * dt;
        let mut weight = (-rate).exp();
        let mut mass = weight;
        let mut v = p.clone();
        let mut acc: Vec<f64> = v.iter().map(|x| weight * x).collect();
        let mut k = 0u64;
        while mass < 1.0 - TRUNCATION {
            k += 1;
            v = step(&v);
            weight *= rate / k as f64;
            mass += weight;
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += weight * x;
            }
        }
        p = acc;
    }
    Ok(sts.into_iter().zip(p).collect())
}

/// Probability that the population fixes on the top value `N - 1`.
pub fn absorption_probability(pop_size: u64, s: f64) -> Result<f64, ExperimentError> {
    check_instance(pop_size, s)?;
    let sts = states(pop_size);
    let moves = transitions(&sts, pop_size, s);
    let top: MultisetState = vec![pop_size as i64 - 1; pop_size as usize];
    // h = 1 at top and 0 at the other absorbing states; elsewhere
    // exit(i) h(i) = sum_j rate(i, j) h(j). Absorbing states have no moves.
    let n = sts.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, st) in sts.iter().enumerate() {
        if st.iter().all(|&v| v == st[0]) {
            a[i][i] = 1.0;
            a[i][n] = if *st == top { 1.0 } else { 0.0 };
        }
    }
    for &(i, j, r) in &moves {
        a[i][i] += r;
        a[i][j] -= r;
    }
    let h = solve(a);
    let start: MultisetState = (0..pop_size as i64).collect();
    Ok(h[sts
        .iter()
        .position(|st| *st == start)
        .expect("start enumerated")])
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .expect("nonempty");
        a.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

/// Empirical law at time `t` over `replicates` class-level runs.
pub fn empirical_distribution(
    pop_size: u64,
    s: f64,
    t: f64,
    replicates: u32,
    seed: u64,
) -> Result<BTreeMap<MultisetState, u32>, ExperimentError> {
    check_instance(pop_size, s)?;
    let params =
        Params::new(pop_size, 0.0, 0.5, s).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let initial =
        Population::from_values(&(0..pop_size as i64).collect::<Vec<_>>()).expect("N >= 2");
    let finals: Vec<MultisetState> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let cfg = SimConfig::new(
                params,
                t,
                t,
                stream_seed(seed, 0, r as u64),
                SimMode::ClassLevel,
            );
            let run = simulate_classes(&cfg, &initial)?;
            Ok(run
                .final_population
                .iter()
                .flat_map(|(k, c)| std::iter::repeat_n(k, c as usize))
                .collect())
        })
        .collect::<Result<_, ExperimentError>>()?;
    let mut hist = BTreeMap::new();
    for st in finals {
        *hist.entry(st).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Half the L1 distance between two laws on the same finite set.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Compares the exact time-`t` law with empirical frequencies from the
/// class-level engine.
pub fn small_instance_oracle(
    pop_size: u64,
    s: f64,
    t: f64,
    replicates: u32,
    seed: u64,
) -> Result<OracleReport, ExperimentError> {
    if replicates == 0 {
        return Err(ExperimentError::Config(
            "replicates must be at least 1".into(),
        ));
    }
    let exact = exact_distribution(pop_size, s, t)?;
    let counts = empirical_distribution(pop_size, s, t, replicates, seed)?;
    let rows: Vec<OracleRow> = exact
        .into_iter()
        .map(|(state, p)| {
            let c = counts.get(&state).copied().unwrap_or(0);
            OracleRow {
                state,
                exact: p,
                empirical: c as f64 / replicates as f64,
            }
        })
        .collect();
    let e: Vec<f64> = rows.iter().map(|r| r.exact).collect();
    let m: Vec<f64> = rows.iter().map(|r| r.empirical).collect();
    Ok(OracleReport {
        pop_size,
        s,
        t,
        replicates,
        total_variation: total_variation(&e, &m),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_counts() {
        assert_eq!(states(2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(states(3).len(), 10);
    }

    #[test]
    fn two_state_absorption_closed_form() {
        for &s in &[0.0, 0.5, 1.0, 3.0] {
            let h = absorption_probability(2, s).unwrap();
            assert!((h - (1.0 + s) / (2.0 + s)).abs() < 1e-14, "s={s}: {h}");
        }
    }

    #[test]
    fn two_state_transient_closed_form() {
        // From {0, 1} the chain leaves at rate 1 + s/2, so
        // P(still mixed at t) = exp(-(1 + s/2) t).
        let (s, t) = (1.0, 0.7);
        let d = exact_distribution(2, s, t).unwrap();
        let mixed = d.iter().find(|(st, _)| *st == vec![0, 1]).unwrap().1;
        assert!((mixed - (-(1.0 + s / 2.0) * t).exp()).abs() < 1e-12);
        let total: f64 = d.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn long_times_are_chunked() {
        let d = exact_distribution(3, 0.5, 400.0).unwrap();
        let top = d.iter().find(|(st, _)| *st == vec![2, 2, 2]).unwrap().1;
        assert!((top - absorption_probability(3, 0.5).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn rejects_unsupported_sizes() {
        assert!(exact_distribution(4, 0.5, 1.0).is_err());
        assert!(exact_distribution(1, 0.5, 1.0).is_err());
    }
}
