//! Service and switch-over time distributions.
//!
//! Every family here has a closed-form LST, exact first two moments and an
//! exact sampler, which is all the transform engine and the simulator need.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

/// A nonnegative duration distribution.
///
/// Encoded in configuration files as `{"kind": "exponential", "rate": 1.2}`,
/// `{"kind": "deterministic", "value": 2.4}` or
/// `{"kind": "erlang", "shape": 3, "rate": 0.5}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ServiceDistribution {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Erlang { shape: u32, rate: f64 },
}

impl ServiceDistribution {
    pub fn exponential_with_mean(mean: f64) -> Self {
        ServiceDistribution::Exponential { rate: 1.0 / mean }
    }

    pub fn deterministic(value: f64) -> Self {
        ServiceDistribution::Deterministic { value }
    }

    pub fn erlang_with_mean(shape: u32, mean: f64) -> Self {
        ServiceDistribution::Erlang {
            shape,
            rate: shape as f64 / mean,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ServiceDistribution::Exponential { rate } => 1.0 / rate,
            ServiceDistribution::Deterministic { value } => value,
            ServiceDistribution::Erlang { shape, rate } => shape as f64 / rate,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            ServiceDistribution::Exponential { rate } => 2.0 / (rate * rate),
            ServiceDistribution::Deterministic { value } => value * value,
            ServiceDistribution::Erlang { shape, rate } => {
                let k = shape as f64;
                k * (k + 1.0) / (rate * rate)
            }
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// True when the distribution is the point mass at zero.
    pub fn is_zero(&self) -> bool {
        matches!(*self, ServiceDistribution::Deterministic { value } if value == 0.0)
    }

    /// Laplace-Stieltjes transform `E[exp(-s X)]`.
    ///
    /// Defined for every `s >= 0`. For negative `s` the analytic continuation
    /// is returned where it exists and `NaN` past the pole of the
    /// exponential and Erlang families.
    pub fn lst(&self, s: f64) -> f64 {
        match *self {
            ServiceDistribution::Exponential { rate } => {
                if rate + s <= 0.0 {
                    f64::NAN
                } else {
                    rate / (rate + s)
                }
            }
            ServiceDistribution::Deterministic { value } => (-s * value).exp(),
            ServiceDistribution::Erlang { shape, rate } => {
                if rate + s <= 0.0 {
                    f64::NAN
                } else {
                    (-(shape as f64) * (s / rate).ln_1p()).exp()
                }
            }
        }
    }

    /// `1 - lst(s)` without cancellation for small `s`.
    pub fn one_minus_lst(&self, s: f64) -> f64 {
        match *self {
            ServiceDistribution::Exponential { rate } => {
                if rate + s <= 0.0 {
                    f64::NAN
                } else {
                    s / (rate + s)
                }
            }
            ServiceDistribution::Deterministic { value } => -(-s * value).exp_m1(),
            ServiceDistribution::Erlang { shape, rate } => {
                if rate + s <= 0.0 {
                    f64::NAN
                } else {
                    -(-(shape as f64) * (s / rate).ln_1p()).exp_m1()
                }
            }
        }
    }

    /// LST of the elapsed (equivalently residual) life,
    /// `(1 - lst(s)) / (s E[X])`, continuous at `s = 0`.
    pub fn past_lst(&self, s: f64) -> f64 {
        let mean = self.mean();
        if s.abs() < 1e-300 {
            return 1.0;
        }
        self.one_minus_lst(s) / (s * mean)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ServiceDistribution::Exponential { rate } => {
                Exp::new(rate).expect("validated exponential rate").sample(rng)
            }
            ServiceDistribution::Deterministic { value } => value,
            ServiceDistribution::Erlang { shape, rate } => Gamma::new(shape as f64, 1.0 / rate)
                .expect("validated erlang parameters")
                .sample(rng),
        }
    }

    /// Parameter sanity, independent of the role the distribution plays.
    pub fn check(&self) -> Result<(), String> {
        match *self {
            ServiceDistribution::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(format!("exponential rate must be positive and finite, got {rate}"));
                }
            }
            ServiceDistribution::Deterministic { value } => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(format!(
                        "deterministic value must be nonnegative and finite, got {value}"
                    ));
                }
            }
            ServiceDistribution::Erlang { shape, rate } => {
                if shape == 0 {
                    return Err("erlang shape must be a positive integer".to_string());
                }
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(format!("erlang rate must be positive and finite, got {rate}"));
                }
            }
        }
        Ok(())
    }

    /// Same family and shape, rescaled so that the mean becomes `mean`.
    pub fn with_mean(&self, mean: f64) -> Self {
        match *self {
            ServiceDistribution::Exponential { .. } => Self::exponential_with_mean(mean),
            ServiceDistribution::Deterministic { .. } => Self::deterministic(mean),
            ServiceDistribution::Erlang { shape, .. } => Self::erlang_with_mean(shape, mean),
        }
    }
}
