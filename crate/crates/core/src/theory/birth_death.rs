use super::TheoryError;

/// `E[x^{Z_t}]` for the linear birth-death chain with per-capita birth rate
/// `a`, death rate `b` and `Z_0 = z0`:
///
/// `((b(x-1) - (ax-b) e^{-(a-b)t}) / (a(x-1) - (ax-b) e^{-(a-b)t}))^{z0}`.
///
/// When `(a - b) t < 0` numerator and denominator are rescaled by
/// `e^{(a-b)t}` so nothing overflows.
pub fn pgf_birth_death(x: f64, t: f64, a: f64, b: f64, z0: u64) -> Result<f64, TheoryError> {
    if !(0.0..1.0).contains(&x) {
        return Err(TheoryError::Domain(format!(
            "pgf argument must lie in [0, 1), got {x}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(TheoryError::Domain(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(TheoryError::Domain(format!(
            "rates must be nonnegative, got a={a}, b={b}"
        )));
    }
    if a == b {
        return Err(TheoryError::Domain(
            "pgf formula is singular at a = b".into(),
        ));
    }
    if z0 == 0 {
        return Err(TheoryError::Domain("initial count must be positive".into()));
    }
    let growth = (a - b) * t;
    let ratio = if growth >= 0.0 {
        let e = (-growth).exp();
        (b * (x - 1.0) - (a * x - b) * e) / (a * (x - 1.0) - (a * x - b) * e)
    } else {
        let e = growth.exp();
        (b * (x - 1.0) * e - (a * x - b)) / (a * (x - 1.0) * e - (a * x - b))
    };
    let ratio = ratio.clamp(0.0, 1.0);
    if ratio == 0.0 {
        return Ok(0.0);
    }
    Ok((z0 as f64 * ratio.ln()).exp())
}

/// `P(Z_t <= k)` for the linear birth-death chain, `a != b`.
///
/// One ancestor leaves `0` descendants with probability `alpha` and
/// `j >= 1` with probability `(1 - alpha)(1 - beta) beta^{j-1}`, where
/// `alpha = b(E - 1)/(aE - b)`, `beta = a(E - 1)/(aE - b)` and
/// `E = e^{(a-b)t}`. The `z0` ancestors are independent, so the law of
/// `Z_t` is the `z0`-fold convolution.
pub fn birth_death_cdf(a: f64, b: f64, t: f64, z0: u64, k: u64) -> Result<f64, TheoryError> {
    // Reuse the argument checks of the generating function.
    pgf_birth_death(0.0, t, a, b, z0)?;
    let (alpha, beta) = if t == 0.0 {
        (0.0, 0.0)
    } else {
        let em1 = ((a - b) * t).exp_m1();
        let den = a * em1 + (a - b);
        (b * em1 / den, a * em1 / den)
    };
    let k = k as usize;
    let mut single = vec![0.0; k + 1];
    single[0] = alpha;
    let mut g = (1.0 - alpha) * (1.0 - beta);
    for p in single.iter_mut().skip(1) {
        *p = g;
        g *= beta;
    }
    let mut law = vec![0.0; k + 1];
    law[0] = 1.0;
    for _ in 0..z0 {
        let mut next = vec![0.0; k + 1];
        for (i, &p) in law.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &q) in single.iter().enumerate().take(k + 1 - i) {
                next[i + j] += p * q;
            }
        }
        law = next;
    }
    Ok(law.iter().sum::<f64>().min(1.0))
}

/// Markov bound `P(Z_t <= k) <= (1 - 1/M)^{-k} (4b/a)^{z0}`, valid when
/// `a >= b`, `M >= 1` and `t >= max(ln 2, ln(aM/b)) / (a - b)`.
pub fn birth_death_tail_bound(
    a: f64,
    b: f64,
    m: f64,
    t: f64,
    k: u64,
    z0: u64,
) -> Result<f64, TheoryError> {
    if !(a > b && b > 0.0 && a.is_finite()) {
        return Err(TheoryError::Domain(format!(
            "tail bound needs a > b > 0 so that the waiting time is finite, got a={a}, b={b}"
        )));
    }
    if !(m >= 1.0) {
        return Err(TheoryError::Domain(format!(
            "tail bound needs M >= 1, got {m}"
        )));
    }
    if z0 == 0 {
        return Err(TheoryError::Domain("initial count must be positive".into()));
    }
    let t_min = 2f64.ln().max((a * m / b).ln()) / (a - b);
    if !(t >= t_min) {
        return Err(TheoryError::Domain(format!(
            "tail bound needs t >= {t_min}, got {t}"
        )));
    }
    let markov = (1.0 - 1.0 / m).powf(-(k as f64));
    Ok(markov * (4.0 * b / a).powf(z0 as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sim_rng;
    use crate::sim::birth_death_terminal;

    #[test]
    fn initial_condition() {
        for &x in &[0.0, 0.3, 0.9] {
            let g = pgf_birth_death(x, 0.0, 2.0, 1.0, 3).unwrap();
            assert!((g - x * x * x).abs() < 1e-15);
        }
    }

    #[test]
    fn normalization_near_one() {
        for &(a, b, t) in &[(2.0, 1.0, 1.0), (0.5, 1.5, 3.0), (1.0, 0.0, 0.5)] {
            let g = pgf_birth_death(1.0 - 1e-8, t, a, b, 4).unwrap();
            assert!((g - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn pure_birth_reduction() {
        let (x, a, t) = (0.5f64, 1.0f64, 1.0f64);
        let e = (-a * t).exp();
        let direct = (x * e / (1.0 - x * (1.0 - e))).powi(2);
        assert!((pgf_birth_death(x, t, a, 0.0, 2).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn extinction_regime_stays_finite() {
        // b > a with a long horizon: the naive form overflows e^{(b-a)t}.
        let g = pgf_birth_death(0.4, 2000.0, 0.5, 1.0, 5).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        let g0 = pgf_birth_death(0.0, 1.0, 0.0, 1.0, 2).unwrap();
        assert!((g0 - (1.0 - (-1.0f64).exp()).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn singular_and_domain_errors() {
        assert!(pgf_birth_death(0.5, 1.0, 1.0, 1.0, 1).is_err());
        assert!(pgf_birth_death(1.0, 1.0, 2.0, 1.0, 1).is_err());
        assert!(pgf_birth_death(0.5, -1.0, 2.0, 1.0, 1).is_err());
    }

    #[test]
    fn matches_monte_carlo() {
        let (a, b, z0, t, x) = (2.0, 1.0, 3, 1.0, 0.5f64);
        let mut rng = sim_rng(2024);
        let runs = 100_000;
        let vals: Vec<f64> = (0..runs)
            .map(|_| x.powi(birth_death_terminal(a, b, z0, t, &mut rng) as i32))
            .collect();
        let mean = vals.iter().sum::<f64>() / runs as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let se = (var / runs as f64).sqrt();
        let exact = pgf_birth_death(x, t, a, b, z0).unwrap();
        assert!(
            (mean - exact).abs() < 3.0 * se,
            "{mean} vs {exact} (se {se})"
        );
    }

    #[test]
    fn cdf_matches_generating_function() {
        // Single ancestor: G(x) = alpha + (1 - alpha)(1 - beta) x / (1 - beta x),
        // so P(Z <= 0) = G(0) and the full mass sums to one.
        for &(a, b, t) in &[(2.0, 1.0, 1.0), (0.5, 1.5, 2.0), (1.0, 0.0, 0.7)] {
            for z0 in [1, 3] {
                let g0 = pgf_birth_death(0.0, t, a, b, z0).unwrap();
                assert!((birth_death_cdf(a, b, t, z0, 0).unwrap() - g0).abs() < 1e-14);
                assert!((birth_death_cdf(a, b, t, z0, 4000).unwrap() - 1.0).abs() < 1e-9);
            }
        }
        // Expected value of x^Z from the pmf differences.
        let (a, b, t, z0, x) = (2.0, 1.0, 1.0, 3, 0.5f64);
        let mut prev = 0.0;
        let mut e = 0.0;
        for k in 0..400u64 {
            let c = birth_death_cdf(a, b, t, z0, k).unwrap();
            e += (c - prev) * x.powi(k as i32);
            prev = c;
        }
        assert!((e - pgf_birth_death(x, t, a, b, z0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_values() {
        let t = (8f64 * 2.0).ln() / 1.75;
        assert!((birth_death_tail_bound(2.0, 0.25, 2.0, t, 0, 4).unwrap() - 0.0625).abs() < 1e-15);
        // Large M drives the Markov factor to one.
        let m = 1e9;
        let t = (2.0 * m / 0.25f64).ln() / 1.75;
        let v = birth_death_tail_bound(2.0, 0.25, m, t, 5, 2).unwrap();
        assert!((v - 0.25).abs() < 1e-7);
    }

    #[test]
    fn tail_bound_preconditions() {
        assert!(birth_death_tail_bound(1.0, 1.0, 2.0, 10.0, 0, 1).is_err());
        assert!(birth_death_tail_bound(2.0, 1.0, 0.5, 10.0, 0, 1).is_err());
        assert!(birth_death_tail_bound(2.0, 1.0, 2.0, 0.1, 0, 1).is_err());
        assert!(birth_death_tail_bound(2.0, 0.0, 2.0, 10.0, 0, 1).is_err());
    }
}
