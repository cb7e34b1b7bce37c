//! Event-driven simulation of the polling model and the statistics used
//! to compare its output with the analytic results.

mod engine;
mod event;
mod stats;

pub use engine::{run_simulation, SampleSet, SimOptions, StopRule};
pub use event::{Event, EventKind, EventRecord, LoggedKind};
pub use stats::{
    batch_means_half_width, empirical_cdf, estimate, ks_distance, summarize, EmpiricalCdf, Estimate, Summary, BATCHES,
};
