//! Two-queue polling system with Markovian routing and a two-class
//! non-preemptive priority queue: exact transforms, limit laws and a
//! discrete-event simulator.

pub mod asymptotics;
pub mod distribution;
pub mod error;
pub mod model;
pub mod sim;
pub mod transform;

pub use asymptotics::{gamma_mixture_cdf, heavy_traffic_params, limit_cdf, limit_cdf_fn, AsymptoticParams, Regime};
pub use distribution::ServiceDistribution;
pub use error::{AsymptoticError, ModelError, SimError, StatsError, TransformError};
pub use model::{
    derive_model, derive_routing, table1_config, table2_config, validate, Class, DerivedModel, Queue, Routing,
    SystemConfig, ValidationReport, Violation,
};
pub use sim::{
    empirical_cdf, ks_distance, run_simulation, summarize, EmpiricalCdf, SampleSet, SimOptions, StopRule, Summary,
};
pub use transform::{lst_moment, BusyPeriod, EvalOptions, Transform, TransformEngine, TransformHandle, TransformKind};
