//! Command-line front end for repeater-chain experiments: config loading,
//! parameter sweeps, CSV export and SVG charts.

pub mod app;
pub mod config_io;
pub mod error;
pub mod plan;
pub mod plot;
pub mod row;
pub mod sweep;

pub use app::{execute, Cli};
pub use error::{CliError, CliResult};
pub use row::{read_rows, rows_to_string, write_rows, ResultRow, COLUMNS};
pub use sweep::{run_sweep, Axis, SweepSpec};
