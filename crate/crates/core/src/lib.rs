//! Path-integral Monte Carlo for bosons truncated on a coordinate grid.
//!
//! A coordinate `x` is restricted to `points` values `-R, -R + a, ..., R`.
//! With a first-order Trotter step the path integral has nonnegative weights,
//! so it can be sampled by Metropolis single-site and cluster moves
//! ([`mcmc`]). Single-boson results are checked against exact
//! diagonalization ([`exact_diag`]) and free lattice fields against their
//! analytic mode widths ([`lattice`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod digitization;
pub mod error;
pub mod exact_diag;
pub mod lattice;
pub mod mcmc;
pub mod stats;

pub use digitization::{BlockSums, CoordinateSums, DigitizationGrid, PotentialModel};
pub use error::{Error, Result};
pub use exact_diag::{EigenSystem, TridiagonalHamiltonian};
pub use lattice::{LatticeGeometry, MomentumMode};
pub use mcmc::{ChainStream, Observable, PathConfiguration, PathIntegral, Schedule, TrotterParams};
pub use stats::{AggregateResult, ObservableSeries};
