//! Statistical laws of the simulation engines checked against exact rates
//! and against each other.

use moran_wave::io::trajectory_csv;
use moran_wave::population::{mean_fitness, IndividualState, Params, Population};
use moran_wave::rng::stream_seed;
use moran_wave::sim::{
    simulate_classes, simulate_coupled, simulate_individuals, simulate_individuals_observed,
    SimConfig, SimMode,
};

fn config(params: Params, horizon: f64, interval: f64, seed: u64, mode: SimMode) -> SimConfig {
    SimConfig::new(params, horizon, interval, seed, mode)
}

/// `|observed - expected| <= k` standard errors of a Poisson count over
/// time `t`.
fn poisson_rate_within(count: u64, t: f64, rate: f64, k: f64) -> bool {
    let se = (rate * t).sqrt() / t;
    (count as f64 / t - rate).abs() <= k * se
}

#[test]
fn single_individual_is_a_random_walk() {
    let (mu, q) = (0.01, 0.3);
    let params = Params::new(1, mu, q, 0.5).unwrap();
    let horizon = 1.0e7;
    let run = simulate_classes(
        &config(params, horizon, horizon / 100.0, 11, SimMode::ClassLevel),
        &Population::point_mass(0, 1).unwrap(),
    )
    .unwrap();
    let e = run.events;
    assert!(e.mutation_up + e.mutation_down > 90_000);
    assert!(
        poisson_rate_within(e.mutation_up, horizon, q * mu, 3.0),
        "{e:?}"
    );
    assert!(
        poisson_rate_within(e.mutation_down, horizon, (1.0 - q) * mu, 3.0),
        "{e:?}"
    );
    assert_eq!(e.selection, 0);
    assert_eq!(e.resampling, 0);
    let last = run.records.last().unwrap();
    assert_eq!(
        last.mean_fitness,
        e.mutation_up as f64 - e.mutation_down as f64
    );
}

#[test]
fn two_individuals_coalesce_at_unit_rate() {
    // Ordered pairs (0,1) and (1,0) each fire at rate 1/N = 1/2, so the
    // coalescence time is exponential with rate 1.
    let params = Params::new(2, 0.0, 0.5, 0.0).unwrap();
    let runs = 100_000u64;
    let times: Vec<f64> = (0..runs)
        .map(|r| {
            let cfg = config(
                params,
                40.0,
                40.0,
                stream_seed(5, 0, r),
                SimMode::IndividualLevel,
            );
            let mut hit = f64::NAN;
            simulate_individuals_observed(&cfg, &IndividualState::new(vec![0, 1]), |t, _, e| {
                if hit.is_nan() && e.support_width() == 0 {
                    hit = t;
                }
            })
            .unwrap();
            hit
        })
        .collect();
    assert!(times.iter().all(|t| t.is_finite()));
    let mean = times.iter().sum::<f64>() / runs as f64;
    let sd = (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
    let se = sd / (runs as f64).sqrt();
    assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} +- {se}");
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn class_and_individual_engines_agree_in_law() {
    let params = Params::new(50, 0.01, 0.5, 0.01).unwrap();
    let reps = 20_000u64;
    let horizon = 50.0;
    let class: Vec<f64> = (0..reps)
        .map(|r| {
            let cfg = config(
                params,
                horizon,
                horizon,
                stream_seed(21, 0, r),
                SimMode::ClassLevel,
            );
            mean_fitness(
                &simulate_classes(&cfg, &Population::point_mass(0, 50).unwrap())
                    .unwrap()
                    .final_population,
            )
        })
        .collect();
    let indiv: Vec<f64> = (0..reps)
        .map(|r| {
            let cfg = config(
                params,
                horizon,
                horizon,
                stream_seed(21, 1, r),
                SimMode::IndividualLevel,
            );
            simulate_individuals(&cfg, &IndividualState::new(vec![0; 50]))
                .unwrap()
                .final_state
                .population()
                .iter()
                .map(|(k, c)| k as f64 * c as f64)
                .sum::<f64>()
                / 50.0
        })
        .collect();
    let d = ks_statistic(class, indiv);
    // Asymptotic 1% critical value.
    let critical = 1.628 * (2.0 / reps as f64).sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}

#[test]
fn event_rates_match_totals() {
    let (n, mu) = (100u64, 0.05);
    let params = Params::new(n, mu, 0.3, 0.02).unwrap();
    let horizon = 20_000.0;
    for mode in [SimMode::ClassLevel, SimMode::IndividualLevel] {
        let cfg = config(params, horizon, 100.0, 8, mode);
        let e = match mode {
            SimMode::ClassLevel => {
                simulate_classes(&cfg, &Population::point_mass(0, n).unwrap())
                    .unwrap()
                    .events
            }
            _ => {
                simulate_individuals(&cfg, &IndividualState::new(vec![0; n as usize]))
                    .unwrap()
                    .events
            }
        };
        let mutations = e.mutation_up + e.mutation_down;
        assert!(mutations >= 100_000 - 2_000, "{mode:?}: {e:?}");
        assert!(
            poisson_rate_within(mutations, horizon, mu * n as f64, 4.0),
            "{mode:?}: {e:?}"
        );
        let resampling = e.resampling + e.resampling_noop;
        assert!(
            poisson_rate_within(resampling, horizon, n as f64, 4.0),
            "{mode:?}: {e:?}"
        );
    }
}

#[test]
fn neutral_shadow_has_mutational_drift_only() {
    let (mu, q) = (0.01, 0.2);
    let params = Params::new(100, mu, q, 0.05).unwrap();
    let horizon = 200.0;
    let reps = 200u64;
    let slopes: Vec<(f64, f64)> = (0..reps)
        .map(|r| {
            let cfg = config(
                params,
                horizon,
                horizon,
                stream_seed(31, 0, r),
                SimMode::CoupledNeutral,
            );
            let run = simulate_coupled(&cfg, &IndividualState::coupled(vec![0; 100])).unwrap();
            let (x, y) = run.records.last().unwrap();
            (x.mean_fitness / horizon, y.mean_fitness / horizon)
        })
        .collect();
    let ys: Vec<f64> = slopes.iter().map(|p| p.1).collect();
    let mean = ys.iter().sum::<f64>() / reps as f64;
    let sd = (ys.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    let se = sd / (reps as f64).sqrt();
    let drift = mu * (2.0 * q - 1.0);
    assert!(
        (mean - drift).abs() <= 3.0 * se,
        "{mean} vs {drift} (se {se})"
    );
    // Selection pushes the selected population above its shadow.
    assert!(slopes.iter().all(|(x, y)| x >= y));
}

#[test]
fn identical_inputs_give_identical_csv() {
    let params = Params::new(100, 0.01, 0.02, 0.01).unwrap();
    let start = Population::point_mass(0, 100).unwrap();
    let cfg = config(params, 100.0, 1.0, 77, SimMode::ClassLevel);
    let a = trajectory_csv(&simulate_classes(&cfg, &start).unwrap().records);
    let b = trajectory_csv(&simulate_classes(&cfg, &start).unwrap().records);
    assert_eq!(a, b);
    let other = config(params, 100.0, 1.0, 78, SimMode::ClassLevel);
    assert_ne!(
        a,
        trajectory_csv(&simulate_classes(&other, &start).unwrap().records)
    );
}

#[test]
fn resampling_alone_fixes_one_class() {
    let params = Params::new(20, 0.0, 0.5, 0.0).unwrap();
    let start = Population::from_counts((0..5).map(|k| (k, 4))).unwrap();
    for seed in 0..20 {
        let run = simulate_classes(
            &config(params, 400.0, 1.0, seed, SimMode::ClassLevel),
            &start,
        )
        .unwrap();
        assert!(run.records.windows(2).all(|w| w[1].k_w <= w[0].k_w));
        assert_eq!(run.records.last().unwrap().k_w, 0, "seed {seed}");
        assert_eq!(run.final_population.iter().count(), 1);
    }
}
