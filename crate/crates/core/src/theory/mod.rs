//! Closed-form and semi-analytic results: the drift of the mean, the
//! central-moment recursion and its Gaussian fixed point, the wave-speed
//! predictor, the birth-death generating function and the tail bounds.

mod birth_death;
mod moments;
mod tails;
mod wave;

use thiserror::Error;

pub use birth_death::{birth_death_cdf, birth_death_tail_bound, pgf_birth_death};
pub use moments::{drift_rate, gaussian_central_moment, moment_ode_rhs, MomentVector};
pub use tails::{
    binomial_cdf, binomial_lower_tail_bound, ln_factorial, log_poisson_tail_ge,
    poisson_lower_tail_bound, poisson_tail_ge, poisson_upper_tail_check, PoissonUpperTail,
    UPPER_TAIL_CONSTANT,
};
pub use wave::{
    front_k_asymptotic, front_k_lambert, front_residual, lambert_w, predict_front_k, predict_wave,
    predict_wave_speed, solve_front_k, WavePrediction, FRONT_RESIDUAL_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("{0}")]
    Domain(String),
    #[error("root search did not converge: {0}")]
    NoConvergence(String),
}
