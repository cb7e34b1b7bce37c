//! Scenario reports and limit-regime studies for the priority polling
//! model, shared by the `mpoll` binary and the acceptance suite.

mod error;
mod output;
pub mod scenario;
pub mod study;

pub use error::CliError;
pub use scenario::{
    analytic_means, analyze, check_config, load_config, run_scenario, simulate_config, AnalyticMeans, ScenarioReport,
};
pub use study::{point_seed, study, StudyKind, StudyOutcome, StudySpec, SweepPoint};
