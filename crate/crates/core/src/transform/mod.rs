//! Numerical evaluation of the exact transforms of the polling model.
//!
//! Every transform is a real function: LSTs are evaluated at real `s` and
//! PGFs at real `z`. The public entry points check the admissible domain;
//! the crate-internal `raw` paths also accept small excursions past the
//! identity point, which is what numerical differentiation needs.

mod arbitrary;
mod busy;
mod dsa;
mod handle;
mod moments;
mod timing;

pub use busy::BusyPeriod;
pub use handle::{Transform, TransformHandle, TransformKind};
pub use moments::lst_moment;

use crate::error::TransformError;
use crate::model::{derive_model, validate, Class, DerivedModel, Queue, SystemConfig};

/// Truncation and tolerance settings shared by all evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    /// An infinite product stops once its factor is this close to 1 and
    /// its iterates are this close to the fixed point 1.
    pub product_tol: f64,
    /// Cap on the number of product factors.
    pub max_depth: usize,
    /// Residual bound for busy-period fixed points.
    pub fixpoint_tol: f64,
    /// Iteration cap for busy-period fixed points.
    pub max_iterations: usize,
    /// Finite-difference step, relative to the natural scale of the transform.
    pub fd_step: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            product_tol: 1e-12,
            max_depth: 400,
            fixpoint_tol: 1e-13,
            max_iterations: 100_000,
            fd_step: 1e-4,
        }
    }
}

impl EvalOptions {
    /// Tolerances at the rounding floor. Evaluations stop on stagnation
    /// rather than on the tolerance, which keeps finite differences of the
    /// deeply nested transforms smooth.
    pub fn precise() -> Self {
        EvalOptions {
            product_tol: 1e-15,
            max_depth: 4000,
            fixpoint_tol: 1e-15,
            max_iterations: 1_000_000,
            fd_step: 1e-4,
        }
    }

    pub fn check(&self) -> Result<(), TransformError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.product_tol) || !positive(self.fixpoint_tol) || !positive(self.fd_step) {
            return Err(TransformError::Options("tolerances must be positive".into()));
        }
        if self.max_depth == 0 || self.max_iterations == 0 {
            return Err(TransformError::Options("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Evaluator for all transforms of one stable configuration.
#[derive(Clone, Debug)]
pub struct TransformEngine {
    config: SystemConfig,
    model: DerivedModel,
    opts: EvalOptions,
}

impl TransformEngine {
    pub fn new(config: &SystemConfig) -> Result<Self, TransformError> {
        Self::with_options(config, EvalOptions::default())
    }

    /// Fails on invalid or unstable configurations and when a class has no
    /// arrivals (several transforms divide by the arrival rates).
    pub fn with_options(config: &SystemConfig, opts: EvalOptions) -> Result<Self, TransformError> {
        opts.check()?;
        let report = validate(config);
        if !report.is_valid() {
            return Err(TransformError::Degenerate(report.to_string()));
        }
        for class in Class::ALL {
            if config.arrival_rate(class) <= 0.0 {
                return Err(TransformError::Degenerate(format!(
                    "arrival rate of class {class} must be positive"
                )));
            }
        }
        let model = derive_model(config).map_err(|e| TransformError::Degenerate(e.to_string()))?;
        Ok(TransformEngine {
            config: config.clone(),
            model,
            opts,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn model(&self) -> &DerivedModel {
        &self.model
    }

    pub fn options(&self) -> &EvalOptions {
        &self.opts
    }

    pub fn with_eval_options(mut self, opts: EvalOptions) -> Result<Self, TransformError> {
        opts.check()?;
        self.opts = opts;
        Ok(self)
    }

    fn lambda(&self, q: Queue) -> f64 {
        match q {
            Queue::Q1 => self.model.lambda_1,
            Queue::Q2 => self.config.lambda_2,
        }
    }

    /// Total arrival rate at Poisson argument `(z1, z2)` for the two queues.
    fn arrival_exponent(&self, z1: f64, z2: f64) -> f64 {
        self.model.lambda_1 * (1.0 - z1) + self.config.lambda_2 * (1.0 - z2)
    }

    /// Q1 argument implied by separate H and L arguments.
    fn merge_q1(&self, z_h: f64, z_l: f64) -> f64 {
        (self.config.lambda_h * z_h + self.config.lambda_l * z_l) / self.model.lambda_1
    }

    fn require_switching(&self, what: &str) -> Result<(), TransformError> {
        if self.model.sigma <= 0.0 {
            return Err(TransformError::Degenerate(format!(
                "{what} is undefined without switch-over time (sigma = 0)"
            )));
        }
        Ok(())
    }

    /// Stopping rule shared by all infinite products. `deviation` is the
    /// distance of the current iterates from the fixed point 1 and `change`
    /// the size of the last update.
    fn product_converged(&self, factor: f64, deviation: f64, change: f64) -> bool {
        let tol = self.opts.product_tol;
        let off = (factor - 1.0).abs();
        if off < tol && deviation < tol {
            return true;
        }
        // iterates no longer move: every later factor repeats this one
        change <= 4.0 * f64::EPSILON && off <= 1e4 * f64::EPSILON
    }
}

fn check_unit(what: &'static str, z: f64) -> Result<(), TransformError> {
    if (0.0..=1.0).contains(&z) {
        Ok(())
    } else {
        Err(TransformError::Domain {
            what,
            arg: z,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

fn check_range(what: &'static str, s: f64, lo: f64, hi: f64) -> Result<(), TransformError> {
    if s >= lo && s <= hi {
        Ok(())
    } else {
        Err(TransformError::Domain { what, arg: s, lo, hi })
    }
}

fn finite(what: &'static str, v: f64) -> Result<f64, TransformError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(TransformError::NonFinite(what))
    }
}
