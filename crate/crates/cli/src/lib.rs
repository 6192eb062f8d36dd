//! Command-line front end for `digimc`: configuration, run execution and
//! analysis of stream output.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analyze;
pub mod config;
pub mod output;
pub mod run;

pub use analyze::{analyze, AggregateRow, ExactSource};
pub use config::{load, resolve, Mode, RawConfig, RunConfig};
pub use run::{exact_diag, execute, monte_carlo};
