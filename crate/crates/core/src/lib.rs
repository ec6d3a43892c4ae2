//! Exact event-driven simulation of the Moran model of adaptation with
//! beneficial and deleterious mutation, together with the analytic
//! predictions and statistical checks used to validate it.
//!
//! - [`population`]: fitness-class histograms and their statistics.
//! - [`sim`]: class-level, individual-level and coupled engines, plus the
//!   linear birth-death chain.
//! - [`theory`]: drift law, moment recursion, wave-speed prediction, tail
//!   bounds.
//! - [`experiments`]: adaptation-rate estimation, sweeps and validation
//!   checks.
//! - [`io`]: CSV, SVG and manifest output.

pub mod experiments;
pub mod io;
pub mod population;
pub mod rng;
pub mod sim;
pub mod theory;

pub use population::{IndividualState, Params, Population, TrajectoryRecord};
