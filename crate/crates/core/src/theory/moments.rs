use serde::{Deserialize, Serialize};

use super::TheoryError;
use crate::population::Params;

/// Expected rate of change of the mean fitness, `mu (2q - 1) + s c2`.
pub fn drift_rate(params: &Params, c2: f64) -> f64 {
    params.mutational_drift() + params.s * c2
}

/// Central moments `c_2 ..= c_{n_max}`; `c_0 = 1` and `c_1 = 0` are implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    c: Vec<f64>,
}

impl MomentVector {
    /// `moments[i]` is `c_{i + 2}`.
    pub fn new(moments: Vec<f64>) -> Result<Self, TheoryError> {
        match moments.first() {
            None => Err(TheoryError::Domain(
                "moment vector needs at least c2".into(),
            )),
            Some(&c2) if c2 < 0.0 => Err(TheoryError::Domain(format!(
                "variance must be nonnegative, got {c2}"
            ))),
            _ => Ok(MomentVector { c: moments }),
        }
    }

    /// Moments of a normal law with variance `c2`, up to order `n_max`.
    pub fn gaussian(c2: f64, n_max: u32) -> Result<Self, TheoryError> {
        let c = (2..=n_max)
            .map(|n| gaussian_central_moment(c2, n))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(c)
    }

    pub fn n_max(&self) -> u32 {
        self.c.len() as u32 + 1
    }

    pub fn get(&self, n: u32) -> f64 {
        match n {
            0 => 1.0,
            1 => 0.0,
            _ => self.c[(n - 2) as usize],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }
}

/// Right-hand side of `dc_n/dt = s (c_{n+1} - n c_{n-1} c_2)` for
/// `n = 2 ..= n_max`, closed at `n_max + 1` with the Gaussian moment.
pub fn moment_ode_rhs(m: &MomentVector, s: f64) -> Result<MomentVector, TheoryError> {
    let n_max = m.n_max();
    if n_max < 3 {
        return Err(TheoryError::Domain(format!(
            "moment recursion needs n_max >= 3, got {n_max}"
        )));
    }
    let c2 = m.get(2);
    let closure = gaussian_central_moment(c2, n_max + 1)?;
    let next = |n: u32| if n > n_max { closure } else { m.get(n) };
    let d = (2..=n_max)
        .map(|n| s * (next(n + 1) - n as f64 * m.get(n - 1) * c2))
        .collect();
    // The derivative of c2 may be negative, so skip the variance check.
    Ok(MomentVector { c: d })
}

/// Central moment of order `n` of a normal law with variance `c2`:
/// zero for odd `n`, `(n - 1)!! c2^(n/2)` for even `n`.
pub fn gaussian_central_moment(c2: f64, n: u32) -> Result<f64, TheoryError> {
    if n < 2 {
        return Err(TheoryError::Domain(format!(
            "central moments start at n = 2, got {n}"
        )));
    }
    if c2 < 0.0 {
        return Err(TheoryError::Domain(format!(
            "variance must be nonnegative, got {c2}"
        )));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let double_factorial: f64 = (1..n).step_by(2).map(|k| k as f64).product();
    Ok(double_factorial * c2.powi((n / 2) as i32))
}
