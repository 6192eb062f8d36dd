//! Trotterized path integral over digitized coordinates and its Markov chains.

mod chain;
mod enumerate;
mod observables;
mod params;
mod path;
mod sums;

pub use chain::{
    run_chain, run_streams, stream_seed, AcceptanceTally, ChainOutput, ChainStream, Evaluation,
    MoveTally, PathIntegral, Proposal, Schedule,
};
pub use enumerate::{
    brute_force_average, brute_force_expectation, enumerate_configurations, EnumeratedEnsemble,
    DEFAULT_ENUMERATION_BUDGET,
};
pub use observables::{MeasurementPlan, Observable};
pub use params::TrotterParams;
pub use path::{action, link_weight, LinkKind, PathConfiguration};
pub use sums::{Moments, PathSums};
