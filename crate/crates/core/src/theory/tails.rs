//! Large-deviation bounds for binomial and Poisson variables, and the exact
//! tail probabilities they are checked against.

use serde::{Deserialize, Serialize};

use super::TheoryError;

/// Constant absorbed into `P(Poisson(N mu) >= N^2) <= C e^{-N ln N}`.
pub const UPPER_TAIL_CONSTANT: f64 = 10.0;

/// Upper bound `e^{-n gamma^2 / 2}` on `P(Z <= n gamma / 2)` for
/// `Z ~ Binomial(n, gamma)`.
pub fn binomial_lower_tail_bound(n: u64, gamma: f64) -> Result<f64, TheoryError> {
    if n == 0 || !(gamma > 0.0 && gamma <= 1.0) {
        return Err(TheoryError::Domain(format!(
            "need n >= 1 and gamma in (0, 1], got n={n}, gamma={gamma}"
        )));
    }
    Ok((-(n as f64) * gamma * gamma / 2.0).exp())
}

/// Lower bound `e^{-lambda - 1/(2n)} / sqrt(2 pi) (lambda / n^2)^n` on
/// `P(Z >= n)` for `Z ~ Poisson(lambda)`.
pub fn poisson_lower_tail_bound(lambda: f64, n: u64) -> Result<f64, TheoryError> {
    if n == 0 || !(lambda > 0.0 && lambda.is_finite()) {
        return Err(TheoryError::Domain(format!(
            "need lambda > 0 and n >= 1, got lambda={lambda}, n={n}"
        )));
    }
    let nf = n as f64;
    let log = -lambda - 1.0 / (2.0 * nf) - 0.5 * (2.0 * std::f64::consts::PI).ln()
        + nf * (lambda / (nf * nf)).ln();
    Ok(log.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonUpperTail {
    /// `ln P(Poisson(N mu) >= N^2)`.
    pub log_exact_tail: f64,
    /// `ln C - N ln N`.
    pub log_bound: f64,
    pub holds: bool,
}

/// Exact `P(Poisson(N mu) >= N^2)` in log space, compared against
/// `C e^{-N ln N}`.
pub fn poisson_upper_tail_check(pop_size: u64, mu: f64) -> Result<PoissonUpperTail, TheoryError> {
    if pop_size == 0 || !(mu > 0.0 && mu.is_finite()) {
        return Err(TheoryError::Domain(format!(
            "need N >= 1 and mu > 0, got N={pop_size}, mu={mu}"
        )));
    }
    let lambda = pop_size as f64 * mu;
    let n = pop_size * pop_size;
    let log_exact_tail = log_poisson_tail_ge(lambda, n);
    let nf = pop_size as f64;
    let log_bound = UPPER_TAIL_CONSTANT.ln() - nf * nf.ln();
    Ok(PoissonUpperTail {
        log_exact_tail,
        log_bound,
        holds: log_exact_tail <= log_bound,
    })
}

/// `ln n!`, exact summation for small `n` and the Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 256 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `P(Z <= k)` for `Z ~ Binomial(n, p)`, by direct summation of the mass
/// function.
pub fn binomial_cdf(n: u64, p: f64, k: u64) -> f64 {
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    (0..=k)
        .map(|i| (ln_choose(n, i) + i as f64 * lp + (n - i) as f64 * lq).exp())
        .sum::<f64>()
        .min(1.0)
}

fn ln_poisson_pmf(lambda: f64, k: u64) -> f64 {
    -lambda + k as f64 * lambda.ln() - ln_factorial(k)
}

/// `ln P(Z >= n)` for `Z ~ Poisson(lambda)`.
pub fn log_poisson_tail_ge(lambda: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if (n as f64) <= lambda {
        let below: f64 = (0..n).map(|k| ln_poisson_pmf(lambda, k).exp()).sum();
        return (1.0 - below).max(f64::MIN_POSITIVE).ln();
    }
    // Terms decay at least geometrically past the mode: sum ratios to the
    // leading term.
    let lead = ln_poisson_pmf(lambda, n);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = n;
    loop {
        k += 1;
        term *= lambda / k as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    lead + sum.ln()
}

pub fn poisson_tail_ge(lambda: f64, n: u64) -> f64 {
    log_poisson_tail_ge(lambda, n).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_factorial_branches_agree() {
        let direct: f64 = (2..=300u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(300) - direct).abs() < 1e-9);
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn binomial_example() {
        let bound = binomial_lower_tail_bound(100, 0.3).unwrap();
        assert!((bound - (-4.5f64).exp()).abs() < 1e-15);
        let exact = binomial_cdf(100, 0.3, 15);
        // Frozen from an independent evaluation (scipy.stats.binom.cdf).
        assert!((exact - 4.049995419437361e-4).abs() < 1e-15, "{exact}");
        assert!(exact <= bound);
        assert_eq!(binomial_cdf(10, 1.0, 5), 0.0);
    }

    #[test]
    fn binomial_cdf_small_case() {
        // Binomial(3, 0.5): P(Z <= 1) = 4/8.
        assert!((binomial_cdf(3, 0.5, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn poisson_lower_example() {
        let bound = poisson_lower_tail_bound(1.0, 2).unwrap();
        assert!((bound - 0.00714).abs() < 5e-5, "{bound}");
        let exact = poisson_tail_ge(1.0, 2);
        assert!((exact - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-14);
        assert!(bound <= exact);
    }

    #[test]
    fn poisson_tail_branches_agree() {
        for &lambda in &[0.5, 3.0, 12.0] {
            for n in 1..30u64 {
                let complement = 1.0 - (0..n).map(|k| ln_poisson_pmf(lambda, k).exp()).sum::<f64>();
                let tail = poisson_tail_ge(lambda, n);
                assert!((tail - complement).abs() < 1e-12, "lambda={lambda} n={n}");
            }
        }
    }

    #[test]
    fn upper_tail_examples() {
        let small = poisson_upper_tail_check(10, 0.01).unwrap();
        assert!(small.log_exact_tail < (1e-150f64).ln());
        assert!(small.holds);
        let big = poisson_upper_tail_check(20, 1.0).unwrap();
        assert!(big.holds);
        let tails: Vec<f64> = (2..40)
            .map(|n| poisson_upper_tail_check(n, 0.5).unwrap().log_exact_tail)
            .collect();
        assert!(tails.windows(2).all(|w| w[1] < w[0]));
    }
}
