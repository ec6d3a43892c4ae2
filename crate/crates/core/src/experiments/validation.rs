//! Fixed-seed validation suites comparing simulators against closed forms
//! and exact oracles. Each check reports what it measured and the limit it
//! was held to.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{drift_identity_check, front_speed_check, PooledCheck};
use super::oracle::{absorption_probability, empirical_distribution, small_instance_oracle};
use super::rate::mean_and_se;
use super::sweep::{map_cells, SweepConfig};
use super::ExperimentError;
use crate::population::{IndividualState, Params, DEFAULT_KD_BETA};
use crate::rng::{sim_rng, stream_seed};
use crate::sim::{
    birth_death_terminal, simulate_coupled, SimConfig, SimError, SimMode, DEFAULT_MAX_EVENTS,
};
use crate::theory::{
    binomial_cdf, binomial_lower_tail_bound, birth_death_cdf, birth_death_tail_bound,
    pgf_birth_death, poisson_lower_tail_bound, poisson_tail_ge, poisson_upper_tail_check,
};

/// Master seed shared by all suites.
pub const VALIDATION_SEED: u64 = 0x6d6f_7261_6e77_6176;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Pgf,
    Bounds,
    Coupling,
    Oracle,
    Drift,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Pgf,
        Suite::Bounds,
        Suite::Coupling,
        Suite::Oracle,
        Suite::Drift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Pgf => "pgf",
            Suite::Bounds => "bounds",
            Suite::Coupling => "coupling",
            Suite::Oracle => "oracle",
            Suite::Drift => "drift",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown suite `{s}` (expected one of pgf, bounds, coupling, oracle, drift)"
                )
            })
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One pass/fail line. `measured` is compared against `limit`; what the
/// comparison means is spelled out in `detail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

fn check(
    suite: Suite,
    name: String,
    measured: f64,
    limit: f64,
    passed: bool,
    detail: String,
) -> Check {
    Check {
        suite,
        name,
        passed,
        measured,
        limit,
        detail,
    }
}

/// `E[x^{Z_t}]` over `runs` simulated chains against the closed form, on
/// the grid `(a, b) x z0 x t x x`, within three standard errors per cell.
pub fn pgf_suite(runs: u32) -> Vec<Check> {
    let rates = [(2.0, 1.0), (1.0, 0.5), (0.5, 0.1)];
    let starts = [1u64, 3];
    let times = [0.5, 1.0, 2.0];
    let xs = [0.2, 0.5, 0.8];
    let mut groups = Vec::new();
    for &(a, b) in &rates {
        for &z0 in &starts {
            for &t in &times {
                groups.push((a, b, z0, t));
            }
        }
    }
    let per_group: Vec<Vec<Check>> = groups
        .par_iter()
        .enumerate()
        .map(|(g, &(a, b, z0, t))| {
            let mut rng = sim_rng(stream_seed(VALIDATION_SEED, 1, g as u64));
            let terminal: Vec<u64> = (0..runs)
                .map(|_| birth_death_terminal(a, b, z0, t, &mut rng))
                .collect();
            xs.iter()
                .map(|&x: &f64| {
                    let vals: Vec<f64> = terminal.iter().map(|&z| x.powf(z as f64)).collect();
                    let (mean, se) = mean_and_se(&vals);
                    let exact = pgf_birth_death(x, t, a, b, z0).expect("valid grid");
                    let z = (mean - exact) / se;
                    check(
                        Suite::Pgf,
                        format!("a={a} b={b} z0={z0} t={t} x={x}"),
                        z.abs(),
                        3.0,
                        z.abs() <= 3.0,
                        format!("monte carlo {mean:.6} vs exact {exact:.6}, se {se:.2e}"),
                    )
                })
                .collect()
        })
        .collect();
    per_group.into_iter().flatten().collect()
}

/// Direction of every tail bound against exact probabilities.
pub fn bounds_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let mut binomial_worst = f64::NEG_INFINITY;
    let mut binomial_cells = 0;
    let mut binomial_ok = 0;
    for n in (10..=200).step_by(10) {
        for g in 1..=9 {
            let gamma = g as f64 / 10.0;
            let k = (n as f64 * gamma / 2.0).floor() as u64;
            let exact = binomial_cdf(n, gamma, k);
            let bound = binomial_lower_tail_bound(n, gamma).expect("valid grid");
            binomial_cells += 1;
            binomial_ok += (exact <= bound) as usize;
            binomial_worst = binomial_worst.max(exact / bound);
        }
    }
    out.push(check(
        Suite::Bounds,
        "binomial lower tail, n in 10..200, gamma in 0.1..0.9".into(),
        binomial_worst,
        1.0,
        binomial_ok == binomial_cells,
        format!("{binomial_ok}/{binomial_cells} cells with exact <= bound; worst exact/bound ratio shown"),
    ));

    let mut poisson_worst = f64::INFINITY;
    let mut cells = 0;
    let mut ok = 0;
    for &lambda in &[0.5, 1.0, 2.0, 10.0, 50.0, 100.0] {
        let ns: Vec<u64> = if lambda <= 2.0 {
            (1..=20).collect()
        } else {
            vec![1]
        };
        for n in ns {
            let exact = poisson_tail_ge(lambda, n);
            let bound = poisson_lower_tail_bound(lambda, n).expect("valid grid");
            cells += 1;
            ok += (bound <= exact) as usize;
            poisson_worst = poisson_worst.min(exact / bound);
        }
    }
    out.push(check(
        Suite::Bounds,
        "poisson lower tail, lambda in {0.5, 1, 2} x n in 1..20, and n = 1 at large lambda".into(),
        poisson_worst,
        1.0,
        ok == cells,
        format!("{ok}/{cells} cells with bound <= exact; smallest exact/bound ratio shown"),
    ));

    let mut upper_margin = f64::INFINITY;
    let mut cells = 0;
    let mut ok = 0;
    let mut monotone = true;
    for &mu in &[0.01, 0.1, 0.5, 1.0] {
        let mut prev = f64::INFINITY;
        for n in 2..=50u64 {
            let r = poisson_upper_tail_check(n, mu).expect("valid grid");
            cells += 1;
            ok += r.holds as usize;
            upper_margin = upper_margin.min(r.log_bound - r.log_exact_tail);
            monotone &= r.log_exact_tail < prev;
            prev = r.log_exact_tail;
        }
    }
    out.push(check(
        Suite::Bounds,
        "poisson upper tail, N in 2..50, mu in {0.01, 0.1, 0.5, 1}".into(),
        upper_margin,
        0.0,
        ok == cells && monotone,
        format!("{ok}/{cells} cells with ln exact <= ln bound, decreasing in N: {monotone}; smallest log margin shown"),
    ));

    let mut bd_worst = f64::NEG_INFINITY;
    let mut cells = 0;
    let mut ok = 0;
    for &a in &[2.0f64, 4.0, 8.0] {
        for &b in &[0.25, 0.5, 1.0] {
            for &m in &[1.5, 2.0, 10.0] {
                let t = 2f64.ln().max((a * m / b).ln()) / (a - b);
                for k in [0u64, 1, 3] {
                    for z0 in [1u64, 3, 10] {
                        let exact = birth_death_cdf(a, b, t, z0, k).expect("valid grid");
                        let bound = birth_death_tail_bound(a, b, m, t, k, z0).expect("valid grid");
                        cells += 1;
                        ok += (exact <= bound) as usize;
                        bd_worst = bd_worst.max(exact / bound);
                    }
                }
            }
        }
    }
    out.push(check(
        Suite::Bounds,
        "birth-death lower tail at the earliest admissible time".into(),
        bd_worst,
        1.0,
        ok == cells,
        format!("{ok}/{cells} cells with exact P(Z_t <= k) <= bound; worst ratio shown"),
    ));
    out
}

/// Monte Carlo version of the birth-death tail bound at `a = 2, b = 1,
/// z0 = 10, M = 2, k = 3, t = 2`.
pub fn birth_death_bound_monte_carlo(runs: u32) -> Check {
    let (a, b, m, k, t, z0) = (2.0, 1.0, 2.0, 3u64, 2.0, 10u64);
    let mut rng = sim_rng(stream_seed(VALIDATION_SEED, 2, 0));
    let hits = (0..runs)
        .filter(|_| birth_death_terminal(a, b, z0, t, &mut rng) <= k)
        .count();
    let freq = hits as f64 / runs as f64;
    let bound = birth_death_tail_bound(a, b, m, t, k, z0).expect("valid parameters");
    check(
        Suite::Bounds,
        "birth-death lower tail, simulated".into(),
        freq,
        bound,
        freq <= bound,
        format!("P(Z_2 <= 3) ~ {freq:.3e} over {runs} runs, bound {bound:.3e}"),
    )
}

/// Coupled runs with selection must keep the neutral shadow below the
/// selected population; without selection the two must coincide.
pub fn coupling_suite(seeds: u32) -> Result<Vec<Check>, ExperimentError> {
    let params = Params::new(100, 0.01, 0.5, 0.05)?;
    let initial = IndividualState::coupled(vec![0; 100]);
    let outcomes: Vec<Result<(usize, bool), SimError>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let cfg = SimConfig::new(
                params,
                200.0,
                1.0,
                stream_seed(VALIDATION_SEED, 3, i as u64),
                SimMode::CoupledNeutral,
            );
            let run = simulate_coupled(&cfg, &initial)?;
            let y = run.final_state.y.as_deref().expect("coupled state");
            let ok = run.final_state.x.iter().zip(y).all(|(x, y)| y <= x);
            Ok((run.events.selection as usize, ok))
        })
        .collect();
    let mut violations = 0usize;
    let mut selections = 0usize;
    for o in outcomes {
        match o {
            Ok((sel, ok)) => {
                selections += sel;
                violations += (!ok) as usize;
            }
            Err(SimError::DominationViolated { .. }) => violations += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let mut out = vec![check(
        Suite::Coupling,
        format!("domination Y <= X, N=100 s=0.05 horizon 200, {seeds} seeds"),
        violations as f64,
        0.0,
        violations == 0,
        format!("{violations} violations; {selections} selection events exercised"),
    )];

    let neutral = Params::new(100, 0.01, 0.5, 0.0)?;
    let cfg = SimConfig::new(
        neutral,
        200.0,
        1.0,
        stream_seed(VALIDATION_SEED, 3, 1000),
        SimMode::CoupledNeutral,
    );
    let run = simulate_coupled(&cfg, &initial)?;
    let identical = run.records.iter().all(|(x, y)| x == y)
        && Some(run.final_state.x.as_slice()) == run.final_state.y.as_deref();
    out.push(check(
        Suite::Coupling,
        "no selection: X and Y coincide".into(),
        (!identical) as u8 as f64,
        0.0,
        identical,
        format!("{} records compared", run.records.len()),
    ));
    Ok(out)
}

/// Exact small-population laws against the class-level engine.
pub fn oracle_suite(replicates: u32) -> Result<Vec<Check>, ExperimentError> {
    let mut out = Vec::new();
    for (i, &(n, s, t)) in [(3u64, 0.5, 2.0), (2, 1.0, 1.0), (3, 2.0, 0.5)]
        .iter()
        .enumerate()
    {
        let r = small_instance_oracle(
            n,
            s,
            t,
            replicates,
            stream_seed(VALIDATION_SEED, 4, i as u64),
        )?;
        out.push(check(
            Suite::Oracle,
            format!("time-t law N={n} s={s} t={t}"),
            r.total_variation,
            0.02,
            r.total_variation <= 0.02,
            format!(
                "total variation over {} states, {replicates} replicates",
                r.rows.len()
            ),
        ));
    }
    // Absorption: a horizon of 60 leaves the N = 2 chain unabsorbed with
    // probability below e^-60.
    for (i, &s) in [1.0, 0.0].iter().enumerate() {
        let exact = absorption_probability(2, s)?;
        let closed = (1.0 + s) / (2.0 + s);
        let hist = empirical_distribution(
            2,
            s,
            60.0,
            replicates,
            stream_seed(VALIDATION_SEED, 5, i as u64),
        )?;
        let top = hist.get(&vec![1, 1]).copied().unwrap_or(0) as f64 / replicates as f64;
        let se = (exact * (1.0 - exact) / replicates as f64).sqrt();
        let z = (top - exact) / se;
        out.push(check(
            Suite::Oracle,
            format!("N=2 fixation on the fitter value, s={s}"),
            z.abs(),
            3.0,
            z.abs() <= 3.0 && (exact - closed).abs() < 1e-12,
            format!(
                "empirical {top:.4} vs exact {exact:.6} (closed form {closed:.6}), se {se:.1e}"
            ),
        ));
    }
    Ok(out)
}

/// Sweep configuration used by the drift suite: N = 1000, mu = s = 0.01,
/// horizon 2000, eight replicates at each `q`.
pub fn drift_sweep_config(qs: &[f64], master_seed: u64) -> SweepConfig {
    SweepConfig {
        grid: qs
            .iter()
            .map(|&q| Params::new(1000, 0.01, q, 0.01).expect("valid"))
            .collect(),
        replicates: 8,
        horizon: 2000.0,
        burn_in_fraction: 0.2,
        record_interval: 1.0,
        master_seed,
        kd_beta: DEFAULT_KD_BETA,
        max_events: DEFAULT_MAX_EVENTS,
    }
}

/// Per-replicate drift and front discrepancies for one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRun {
    pub grid_index: usize,
    pub q: f64,
    pub drift_discrepancy: f64,
    pub front_discrepancy: Option<f64>,
}

pub fn identity_runs(
    cfg: &SweepConfig,
    threads: Option<usize>,
) -> Result<Vec<IdentityRun>, ExperimentError> {
    let burn = cfg.burn_in_fraction;
    map_cells(
        cfg,
        threads,
        |cell, run| -> Result<IdentityRun, ExperimentError> {
            let run = run?;
            let drift = drift_identity_check(&run.records, &cell.params, burn)?;
            let front = front_speed_check(&run.records, burn)
                .ok()
                .map(|f| f.discrepancy);
            Ok(IdentityRun {
                grid_index: cell.grid_index,
                q: cell.params.q,
                drift_discrepancy: drift.discrepancy,
                front_discrepancy: front,
            })
        },
    )?
    .into_iter()
    .collect()
}

/// Pooled drift identity for each `q` and the front/mean identity at
/// `q = 0.02`.
pub fn drift_suite() -> Result<Vec<Check>, ExperimentError> {
    let qs = [0.0, 0.02, 0.5];
    let runs = identity_runs(&drift_sweep_config(&qs, VALIDATION_SEED), None)?;
    let mut out = Vec::new();
    for (g, &q) in qs.iter().enumerate() {
        let d: Vec<f64> = runs
            .iter()
            .filter(|r| r.grid_index == g)
            .map(|r| r.drift_discrepancy)
            .collect();
        let p = PooledCheck::from_discrepancies(&d);
        out.push(check(
            Suite::Drift,
            format!("drift identity q={q}"),
            p.z.abs(),
            3.0,
            p.within(3.0),
            format!(
                "mean discrepancy {:.3e} +- {:.3e} over {} replicates",
                p.mean_discrepancy, p.stderr, p.replicates
            ),
        ));
    }
    let g = qs.iter().position(|&q| q == 0.02).expect("grid has 0.02");
    let fronts: Vec<Option<f64>> = runs
        .iter()
        .filter(|r| r.grid_index == g)
        .map(|r| r.front_discrepancy)
        .collect();
    let present: Vec<f64> = fronts.iter().flatten().copied().collect();
    let p = PooledCheck::from_discrepancies(&present);
    out.push(check(
        Suite::Drift,
        "front k_c and mean speeds q=0.02".into(),
        p.z.abs(),
        3.0,
        present.len() == fronts.len() && p.within(3.0),
        format!(
            "mean slope difference {:.3e} +- {:.3e} over {}/{} replicates with a front",
            p.mean_discrepancy,
            p.stderr,
            present.len(),
            fronts.len()
        ),
    ));
    Ok(out)
}

/// Runs one suite at its default sizes.
pub fn run_suite(suite: Suite) -> Result<Vec<Check>, ExperimentError> {
    match suite {
        Suite::Pgf => Ok(pgf_suite(100_000)),
        Suite::Bounds => {
            let mut v = bounds_suite();
            v.push(birth_death_bound_monte_carlo(100_000));
            Ok(v)
        }
        Suite::Coupling => coupling_suite(20),
        Suite::Oracle => oracle_suite(100_000),
        Suite::Drift => drift_suite(),
    }
}

pub fn run_validation(suites: &[Suite]) -> Result<ValidationReport, ExperimentError> {
    let mut checks = Vec::new();
    for &s in suites {
        checks.extend(run_suite(s)?);
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn bounds_all_hold() {
        let checks = bounds_suite();
        assert_eq!(checks.len(), 4);
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn small_coupling_run() {
        let checks = coupling_suite(2).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }
}
