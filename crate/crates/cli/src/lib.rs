//! Command-line front end: ingest cycle tables, run the band pipeline and
//! write plot-ready tables.
//!
//! `analyze` writes three files into the output directory:
//!
//! * `changepoints.csv`: `change, cycle, location, jump, relevant`;
//! * `bands.csv`: `segment, t, lower, center, upper`, one row per relevant
//!   segment and grid point;
//! * `diagnostics.toml`: `Δ`, `q*`, a `σ̂²` summary, warnings and an echo of
//!   the configuration that reproduces the run.
//!
//! Numbers are written with 12 significant digits.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod ingest;
pub mod output;

pub use config::RunConfig;
pub use error::{CliError, Result};
