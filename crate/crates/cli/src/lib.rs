//! Support code for the `gfmlab` command-line tool: scenario configuration
//! files, the trace CSV format and SVG line charts.

pub mod config;
pub mod output;
pub mod svg;
pub mod trace_csv;
