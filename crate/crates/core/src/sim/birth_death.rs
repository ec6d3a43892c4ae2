//! Linear birth-death chain: `Z -> Z + 1` at rate `a Z`, `Z -> Z - 1` at
//! rate `b Z`, absorbed at zero.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::rng::{exp_wait, sim_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathConfig {
    pub a: f64,
    pub b: f64,
    pub z0: u64,
    pub horizon: f64,
    pub seed: u64,
}

impl BirthDeathConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let rate_ok = |r: f64| r.is_finite() && r >= 0.0;
        if !rate_ok(self.a) || !rate_ok(self.b) {
            return Err(SimError::Config(format!(
                "rates must be nonnegative, got a={}, b={}",
                self.a, self.b
            )));
        }
        if self.z0 == 0 {
            return Err(SimError::Config("initial count must be positive".into()));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(SimError::Config(format!(
                "horizon must be nonnegative, got {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirthDeathEvent {
    pub time: f64,
    /// Count after the event.
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathOutcome {
    pub terminal: u64,
    pub events: Vec<BirthDeathEvent>,
}

pub fn simulate_birth_death(cfg: &BirthDeathConfig) -> Result<BirthDeathOutcome, SimError> {
    cfg.validate()?;
    let mut rng = sim_rng(cfg.seed);
    let mut events = Vec::new();
    let terminal = run(
        cfg.a,
        cfg.b,
        cfg.z0,
        cfg.horizon,
        &mut rng,
        |time, count| events.push(BirthDeathEvent { time, count }),
    );
    Ok(BirthDeathOutcome { terminal, events })
}

/// Count at time `horizon` for one path drawn from `rng`, without keeping
/// the event log. Used by the Monte Carlo checks.
pub fn birth_death_terminal<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    z0: u64,
    horizon: f64,
    rng: &mut R,
) -> u64 {
    run(a, b, z0, horizon, rng, |_, _| {})
}

fn run<R, F>(a: f64, b: f64, z0: u64, horizon: f64, rng: &mut R, mut log: F) -> u64
where
    R: Rng + ?Sized,
    F: FnMut(f64, u64),
{
    let mut z = z0;
    let mut t = 0.0;
    let per_capita = a + b;
    if per_capita <= 0.0 {
        return z;
    }
    let p_birth = a / per_capita;
    while z > 0 {
        t += exp_wait(rng, per_capita * z as f64);
        if t > horizon {
            break;
        }
        if rng.random_bool(p_birth) {
            z += 1;
        } else {
            z -= 1;
        }
        log(t, z);
    }
    z
}
