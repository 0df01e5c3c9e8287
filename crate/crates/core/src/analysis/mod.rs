//! Angle distribution, reduced power-loop models and trace metrics.

pub mod angle;
pub mod closed_loop;
pub mod linear;
pub mod metrics;
pub mod poly;

pub use angle::{g_delta_x, predict_pcc_angle};
pub use closed_loop::{build_closed_loop, LoopParams, Regime};
pub use linear::{LinearModel, StepResponse};
pub use metrics::{analyze_trace, analyze_trace_with, MetricsReport};
