//! Experiment runner for the coded-delay models: config parsing, grid
//! sweeps and CSV output.

pub mod app;
pub mod config;
pub mod output;
pub mod sweep;

pub use app::{run, Cli, CliError};
pub use config::{parse_config, parse_config_with_overrides, ConfigError, ExperimentConfig, Grid, Mode};
pub use output::{emit_cdf, format_g9, write_csv, OutputError, HEADER};
pub use sweep::{grid_points, run_point, run_sweep, run_sweep_with_summaries, Point, ResultRow};
