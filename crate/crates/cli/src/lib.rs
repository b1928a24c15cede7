//! Command-line front end for `tcell-delay`: configuration files, single runs with CSV/SVG
//! artifacts, parallel parameter sweeps and figure reproduction.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod figures;
pub mod run;
pub mod svg;
pub mod sweep;

pub use config::{Overrides, ResolvedRun, SimulateConfig};
pub use error::{CliError, CliResult};
pub use run::{execute, run_id, RunRecord};
pub use sweep::{run_sweep, SweepSpec};
