//! Closed-form limit laws of the scaled waiting times.
//!
//! Three regimes are covered: heavy traffic (`(1 - rho) W` as `rho -> 1`
//! with fixed arrival ratios), large deterministic switch-overs (`W / r` as
//! `r = E S^tot -> infinity`) and the double limit of both.

use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::AsymptoticError;
use crate::model::{derive_model, Class, SystemConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    HeavyTraffic,
    LargeSwitchover,
    DoubleLimit,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::HeavyTraffic, Regime::LargeSwitchover, Regime::DoubleLimit];

    pub fn label(self) -> &'static str {
        match self {
            Regime::HeavyTraffic => "heavy-traffic",
            Regime::LargeSwitchover => "large-switchover",
            Regime::DoubleLimit => "double-limit",
        }
    }
}

/// Parameters of all three limit laws for one configuration shape.
///
/// Hatted loads are the class loads divided by the total load, so they only
/// depend on the arrival ratios. The large-switch-over endpoints `u_*` use
/// the configuration's actual loads.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticParams {
    /// The gamma limit has shape `alpha + 1`.
    pub alpha: f64,
    pub nu_1: f64,
    pub nu_2: f64,
    pub omega_h: f64,
    pub omega_l: f64,
    pub omega_2: f64,
    pub rho_hat_h: f64,
    pub rho_hat_l: f64,
    pub rho_hat_1: f64,
    pub rho_hat_2: f64,
    pub rho_hat_lp: f64,
    pub es_tot: f64,
    /// Actual low-priority completion-time load, the atom of class H in the
    /// large-switch-over limit.
    pub rho_lp: f64,
    pub u_h: f64,
    pub u_l: f64,
    pub u_2: f64,
    pub u_h1: f64,
    pub u_l1: f64,
    pub u_21: f64,
    /// `alpha / E S^tot`.
    pub alpha_1: f64,
}

pub fn heavy_traffic_params(config: &SystemConfig) -> Result<AsymptoticParams, AsymptoticError> {
    let m = derive_model(config).map_err(|e| AsymptoticError::Parameter(e.to_string()))?;
    if !(m.rho > 0.0) {
        return Err(AsymptoticError::Parameter("total load must be positive".into()));
    }
    if !(m.rho < 1.0) {
        return Err(AsymptoticError::Parameter(format!(
            "large-switch-over endpoints need total load < 1, got {}",
            m.rho
        )));
    }
    let rho = m.rho;
    let second: f64 = Class::ALL
        .iter()
        .map(|&c| config.arrival_rate(c) / rho * config.service(c).second_moment())
        .sum();
    if !(second > 0.0 && second.is_finite()) {
        return Err(AsymptoticError::Parameter(
            "weighted second service moment must be positive".into(),
        ));
    }
    let (rho_hat_h, rho_hat_l, rho_hat_2) = (m.rho_h / rho, m.rho_l / rho, m.rho_2 / rho);
    let rho_hat_1 = rho_hat_h + rho_hat_l;
    let rho_hat_lp = rho_hat_l / (1.0 - rho_hat_h);
    let es_tot = m.es_tot;
    let alpha = 2.0 * rho_hat_1 * rho_hat_2 * es_tot / second;
    if !(alpha > 0.0) {
        return Err(AsymptoticError::Parameter(
            "gamma shape offset vanishes (no switch-over time or an empty queue)".into(),
        ));
    }
    let nu_1 = 2.0 * rho_hat_1 / second;
    let nu_2 = 2.0 * rho_hat_2 / second;
    Ok(AsymptoticParams {
        alpha,
        nu_1,
        nu_2,
        omega_h: nu_1,
        omega_l: (1.0 - rho_hat_h) * nu_1,
        omega_2: nu_2,
        rho_hat_h,
        rho_hat_l,
        rho_hat_1,
        rho_hat_2,
        rho_hat_lp,
        es_tot,
        rho_lp: m.rho_lp,
        u_h: (1.0 - m.rho_1) / (1.0 - rho),
        u_l: (1.0 - m.rho_lp) / (1.0 - rho),
        u_2: (1.0 - m.rho_2) / (1.0 - rho),
        u_h1: 1.0 - rho_hat_1,
        u_l1: 1.0 - rho_hat_lp,
        u_21: 1.0 - rho_hat_2,
        alpha_1: alpha / es_tot,
    })
}

impl AsymptoticParams {
    /// Same shape with the mean total switch-over time set to `r`; the gamma
    /// shape offset grows linearly in it.
    pub fn with_total_switchover(&self, r: f64) -> AsymptoticParams {
        AsymptoticParams {
            alpha: self.alpha_1 * r,
            es_tot: r,
            ..self.clone()
        }
    }

    pub fn omega(&self, class: Class) -> f64 {
        match class {
            Class::H => self.omega_h,
            Class::L => self.omega_l,
            Class::Two => self.omega_2,
        }
    }

    /// Mean of the heavy-traffic limit of `(1 - rho) W_class`.
    pub fn heavy_traffic_mean(&self, class: Class) -> f64 {
        let positive = (self.alpha + 1.0) / (2.0 * self.omega(class));
        match class {
            Class::H => (1.0 - self.rho_hat_lp) * positive,
            _ => positive,
        }
    }

    /// Upper end of the uniform large-switch-over limit of `W_class / r`.
    pub fn uniform_endpoint(&self, regime: Regime, class: Class) -> Option<f64> {
        match (regime, class) {
            (Regime::HeavyTraffic, _) => None,
            (Regime::LargeSwitchover, Class::H) => Some(self.u_h),
            (Regime::LargeSwitchover, Class::L) => Some(self.u_l),
            (Regime::LargeSwitchover, Class::Two) => Some(self.u_2),
            (Regime::DoubleLimit, Class::H) => Some(self.u_h1),
            (Regime::DoubleLimit, Class::L) => Some(self.u_l1),
            (Regime::DoubleLimit, Class::Two) => Some(self.u_21),
        }
    }

    /// Probability mass at zero of the limit law.
    pub fn atom(&self, regime: Regime, class: Class) -> f64 {
        match (regime, class) {
            (Regime::LargeSwitchover, Class::H) => self.rho_lp,
            (_, Class::H) => self.rho_hat_lp,
            _ => 0.0,
        }
    }
}

/// CDF of `U G` with `U` uniform on `[0, 1]` and `G` gamma with shape
/// `alpha + 1` and rate `omega`, independent.
pub fn gamma_mixture_cdf(alpha: f64, omega: f64, t: f64) -> Result<f64, AsymptoticError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(AsymptoticError::Parameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(AsymptoticError::Parameter(format!(
            "omega must be positive, got {omega}"
        )));
    }
    if t < 0.0 || t.is_nan() {
        return Err(AsymptoticError::NegativeTime(t));
    }
    Ok(mixture(alpha, omega, t))
}

fn mixture(alpha: f64, omega: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t.is_infinite() {
        return 1.0;
    }
    let x = omega * t;
    let v = gamma_lr(alpha + 1.0, x) + x / alpha * gamma_ur(alpha, x);
    v.clamp(0.0, 1.0)
}

fn uniform(u: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (t / u).min(1.0)
    }
}

fn cdf_value(regime: Regime, class: Class, t: f64, p: &AsymptoticParams) -> f64 {
    let atom = p.atom(regime, class);
    let positive = match p.uniform_endpoint(regime, class) {
        None => mixture(p.alpha, p.omega(class), t),
        Some(u) => uniform(u, t),
    };
    atom + (1.0 - atom) * positive
}

/// Limit CDF of the scaled waiting time of `class` in `regime`.
///
/// Scalings: `(1 - rho) W` in heavy traffic, `W / r` for large
/// switch-overs and `(1 - rho) W / r` in the double limit.
pub fn limit_cdf(regime: Regime, class: Class, t: f64, params: &AsymptoticParams) -> Result<f64, AsymptoticError> {
    if t < 0.0 || t.is_nan() {
        return Err(AsymptoticError::NegativeTime(t));
    }
    Ok(cdf_value(regime, class, t, params))
}

/// [`limit_cdf`] as a total function, zero on the negative axis.
pub fn limit_cdf_fn(regime: Regime, class: Class, params: &AsymptoticParams) -> impl Fn(f64) -> f64 + Send + Sync {
    let p = params.clone();
    move |t| if t < 0.0 { 0.0 } else { cdf_value(regime, class, t, &p) }
}
