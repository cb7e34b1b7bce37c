//! Fixtures shared by the benchmarks.

use markov_polling::{table1_config, table2_config, EvalOptions, SystemConfig, TransformEngine};

/// Scenarios at increasing difficulty for the transform products.
pub fn transform_scenarios() -> Vec<(&'static str, SystemConfig)> {
    vec![
        ("rho0.5", table1_config(0.5)),
        ("rho0.9", table1_config(0.9)),
        ("det_r50", table2_config(50.0)),
    ]
}

pub fn engine(config: &SystemConfig) -> TransformEngine {
    TransformEngine::with_options(config, EvalOptions::default()).expect("benchmark scenario is valid")
}
