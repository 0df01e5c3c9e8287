use thiserror::Error;

use crate::engine::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// The integration blew up. The trace recorded up to that point is kept.
    #[error("simulation diverged at t = {t:.6} s: {reason}")]
    Diverged {
        t: f64,
        reason: String,
        partial: Box<Trace>,
    },

    #[error("PCC voltage collapsed to {magnitude:.4} p.u.")]
    VoltageCollapse { magnitude: f64 },

    #[error("degenerate reactances: x_l and x_g are both zero")]
    DegenerateReactance,

    #[error("improper model: numerator degree {num} exceeds denominator degree {den}")]
    ImproperModel { num: usize, den: usize },

    #[error("model has a pole on the imaginary axis at ω = {omega} rad/s")]
    PoleOnAxis { omega: f64 },

    #[error("analysis window {window} s exceeds trace duration {duration} s")]
    WindowTooLong { window: f64, duration: f64 },
}
