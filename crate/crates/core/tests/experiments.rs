//! Sweep statistics in regimes whose answers are known without the wave
//! approximation.

use moran_wave::experiments::{
    mean_and_se, run_sweep, validation::identity_runs, PooledCheck, SweepConfig,
};
use moran_wave::population::{Params, DEFAULT_KD_BETA};
use moran_wave::sim::DEFAULT_MAX_EVENTS;

fn config(grid: Vec<Params>, replicates: u32, horizon: f64, seed: u64) -> SweepConfig {
    SweepConfig {
        grid,
        replicates,
        horizon,
        burn_in_fraction: 0.2,
        record_interval: 1.0,
        master_seed: seed,
        kd_beta: DEFAULT_KD_BETA,
        max_events: DEFAULT_MAX_EVENTS,
    }
}

fn rates(cfg: &SweepConfig, grid: usize) -> Vec<f64> {
    run_sweep(cfg, None)
        .unwrap()
        .rows
        .iter()
        .filter(|r| r.cell.grid_index == grid)
        .map(|r| r.adaptation_rate.unwrap())
        .collect()
}

#[test]
fn symmetric_neutral_population_does_not_move() {
    let cfg = config(
        vec![Params::new(100, 0.05, 0.5, 0.0).unwrap()],
        24,
        500.0,
        12,
    );
    let (mean, se) = mean_and_se(&rates(&cfg, 0));
    assert!(mean.abs() <= 3.0 * se, "{mean} +- {se}");
}

#[test]
fn neutral_rate_is_mutational_bias() {
    let (mu, q) = (0.05, 0.2);
    let cfg = config(vec![Params::new(100, mu, q, 0.0).unwrap()], 24, 500.0, 13);
    let (mean, se) = mean_and_se(&rates(&cfg, 0));
    let drift = mu * (2.0 * q - 1.0);
    assert!(
        (mean - drift).abs() <= 3.0 * se,
        "{mean} vs {drift} (se {se})"
    );
}

#[test]
fn ratchet_turns_without_beneficial_mutations() {
    let cfg = config(
        vec![Params::new(100, 0.05, 0.0, 0.01).unwrap()],
        8,
        1000.0,
        14,
    );
    let r = rates(&cfg, 0);
    assert!(r.iter().all(|&v| v < 0.0), "{r:?}");
    // Selection slows the decline but cannot reverse it.
    let (mean, _) = mean_and_se(&r);
    assert!(mean > -0.05, "{mean}");
}

#[test]
fn selection_lifts_the_rate() {
    let grid = vec![
        Params::new(300, 0.01, 0.1, 0.0).unwrap(),
        Params::new(300, 0.01, 0.1, 0.05).unwrap(),
    ];
    let cfg = config(grid, 8, 400.0, 15);
    let (neutral, a) = mean_and_se(&rates(&cfg, 0));
    let (selected, b) = mean_and_se(&rates(&cfg, 1));
    assert!(
        selected - neutral > 3.0 * (a * a + b * b).sqrt(),
        "{neutral} vs {selected}"
    );
}

#[test]
fn drift_identity_without_selection() {
    let cfg = config(
        vec![
            Params::new(200, 0.02, 0.0, 0.0).unwrap(),
            Params::new(200, 0.02, 0.7, 0.0).unwrap(),
        ],
        12,
        400.0,
        16,
    );
    let runs = identity_runs(&cfg, None).unwrap();
    for g in 0..2 {
        let d: Vec<f64> = runs
            .iter()
            .filter(|r| r.grid_index == g)
            .map(|r| r.drift_discrepancy)
            .collect();
        let p = PooledCheck::from_discrepancies(&d);
        assert!(p.within(3.0), "grid {g}: {p:?}");
    }
}

#[test]
fn front_follows_mean_under_pure_deleterious_mutation() {
    let cfg = config(
        vec![Params::new(500, 0.02, 0.0, 0.0).unwrap()],
        12,
        400.0,
        17,
    );
    let runs = identity_runs(&cfg, None).unwrap();
    let d: Vec<f64> = runs.iter().map(|r| r.front_discrepancy.unwrap()).collect();
    let p = PooledCheck::from_discrepancies(&d);
    assert!(p.within(3.0), "{p:?}");
}
