//! Dynamic simulation and small-signal analysis of grid-connected converter control.
//!
//! Two outer controllers are modelled on top of a shared inner cascade
//! (virtual admittance, circular current limiter, current PI):
//!
//! * conventional P-f grid-forming control, where the power imbalance drives a
//!   swing-like frequency law `Δω = (P_ref − P)/(Hs + D)`;
//! * hybrid f-P & Q-V control, where a PLL provides synchronization, the
//!   measured frequency deviation adds an inertia/damping term to a saturated
//!   power reference, and a PI power loop shifts the converter angle.
//!
//! The electrical network is a single series branch in a dq frame rotating at
//! nominal frequency. [`engine::run_scenario`] integrates plant, PLL, controller
//! and state of charge together with fixed-step RK4 and produces a [`Trace`].
//! [`analysis`] holds the angle-distribution relations, the closed-loop
//! transfer functions of the simplified power loops, and trace metrics.

// `!(x > 0.0)` style guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod control;
pub mod dq;
pub mod engine;
pub mod error;
pub mod ess;
pub mod per_unit;
pub mod plant;
pub mod pll;
pub mod profile;

pub use dq::DqPair;
pub use engine::{run_scenario, Scenario, Trace};
pub use error::{Error, Result};
pub use per_unit::PerUnitBase;
pub use profile::FrequencyProfile;
