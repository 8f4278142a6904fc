//! Batch front end for the SWIPT relay metrics: figure presets, config-driven
//! sweeps, the validation matrix, and CSV / gnuplot output.

pub mod app;
pub mod config;
pub mod csv_out;
pub mod eval;
pub mod gnuplot;
pub mod presets;
pub mod validate;

pub use app::{run, Cli, Command, Outcome};
