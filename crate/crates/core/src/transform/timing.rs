//! Intervisit, cycle and waiting-time LSTs.

use super::busy::BusyPeriod;
use super::{check_range, finite, TransformEngine};
use crate::error::TransformError;
use crate::model::{Class, Queue};

impl TransformEngine {
    pub(crate) fn intervisit_raw(&self, q: Queue, s: f64) -> Result<f64, TransformError> {
        match q {
            Queue::Q1 => self.polling_raw(q, 1.0 - s / self.model.lambda_1, 1.0),
            Queue::Q2 => self.polling_raw(q, 1.0, 1.0 - s / self.config.lambda_2),
        }
    }

    pub(crate) fn cycle_raw(&self, q: Queue, s: f64) -> Result<f64, TransformError> {
        match q {
            Queue::Q1 => {
                let z = self.theta(BusyPeriod::Q1, s)? - s / self.model.lambda_1;
                self.polling_raw(q, z, 1.0)
            }
            Queue::Q2 => {
                let z = self.theta(BusyPeriod::Q2, s)? - s / self.config.lambda_2;
                self.polling_raw(q, 1.0, z)
            }
        }
    }

    /// Largest `s` at which the intervisit LST of `q` can be evaluated.
    pub fn intervisit_range(&self, q: Queue) -> f64 {
        self.lambda(q)
    }

    /// Largest `s` at which the cycle LST of `q` can be evaluated: the root
    /// of `theta_q(s) = s / lambda_q`.
    pub fn cycle_range(&self, q: Queue) -> Result<f64, TransformError> {
        let lambda = self.lambda(q);
        let which = match q {
            Queue::Q1 => BusyPeriod::Q1,
            Queue::Q2 => BusyPeriod::Q2,
        };
        let (mut lo, mut hi) = (0.0, lambda);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.theta(which, mid)? >= mid / lambda {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(lo)
    }

    pub fn intervisit_lst(&self, q: Queue, s: f64) -> Result<f64, TransformError> {
        check_range("intervisit LST", s, 0.0, self.intervisit_range(q))?;
        self.intervisit_raw(q, s)
    }

    pub fn cycle_time_lst(&self, q: Queue, s: f64) -> Result<f64, TransformError> {
        check_range("cycle-time LST", s, 0.0, self.cycle_range(q)?)?;
        self.cycle_raw(q, s)
    }

    /// Largest `s` at which the waiting-time LST of `class` can be evaluated.
    pub fn waiting_range(&self, class: Class) -> f64 {
        match class {
            Class::H => self.model.lambda_1,
            Class::L => self.config.lambda_l,
            Class::Two => self.config.lambda_2,
        }
    }

    fn h_waiting_from(&self, s: f64, one_minus_intervisit: f64) -> f64 {
        let m = &self.model;
        let c = &self.config;
        let num = m.pi_1 * (1.0 - m.rho) * one_minus_intervisit / m.sigma + c.lambda_l * c.b_l.one_minus_lst(s);
        num / (s - c.lambda_h * c.b_h.one_minus_lst(s))
    }

    fn l_waiting_from(&self, s: f64, one_minus_epoch: f64) -> Result<f64, TransformError> {
        let m = &self.model;
        let den = s - self.config.lambda_l * (1.0 - self.completion_raw(s)?);
        Ok(m.pi_1 * (1.0 - m.rho) / m.sigma * one_minus_epoch / den)
    }

    /// Q1 argument at which the L waiting time reads the polling-epoch PGF.
    fn l_epoch_argument(&self, s: f64) -> Result<(f64, f64), TransformError> {
        let z_h = self.theta(BusyPeriod::H, s)?;
        Ok((z_h, 1.0 - s / self.config.lambda_l))
    }

    pub(crate) fn waiting_raw(&self, class: Class, s: f64) -> Result<f64, TransformError> {
        self.require_switching("the waiting-time LST")?;
        if s == 0.0 {
            return Ok(1.0);
        }
        let m = &self.model;
        let c = &self.config;
        let v = match class {
            Class::H => self.h_waiting_from(s, 1.0 - self.intervisit_raw(Queue::Q1, s)?),
            Class::L => {
                let (z_h, z_l) = self.l_epoch_argument(s)?;
                let epoch = self.priority_polling_raw(Queue::Q1, z_h, z_l, 1.0)?;
                self.l_waiting_from(s, 1.0 - epoch)?
            }
            Class::Two => {
                let epoch = self.polling_raw(Queue::Q2, 1.0, 1.0 - s / c.lambda_2)?;
                m.pi_2 * (1.0 - m.rho) / m.sigma * (1.0 - epoch) / (s - c.lambda_2 * c.b_2.one_minus_lst(s))
            }
        };
        finite("waiting-time LST", v)
    }

    /// Same transform, with the Q1 polling-epoch PGF split into the
    /// repeat-visit term and `G_1` evaluated through `H_1`.
    pub(crate) fn waiting_alt_raw(&self, class: Class, s: f64) -> Result<f64, TransformError> {
        self.require_switching("the waiting-time LST")?;
        if s == 0.0 {
            return Ok(1.0);
        }
        let r = self.model.r;
        let epoch_q1 = |z: f64| -> Result<f64, TransformError> {
            Ok(r[0][0] * self.m_raw(Queue::Q1, Queue::Q1, z, 1.0) + r[1][0] * self.g1_dsa_raw(z)?)
        };
        let v = match class {
            Class::H => {
                let z = 1.0 - s / self.model.lambda_1;
                self.h_waiting_from(s, 1.0 - epoch_q1(z)?)
            }
            Class::L => {
                let (z_h, z_l) = self.l_epoch_argument(s)?;
                self.l_waiting_from(s, 1.0 - epoch_q1(self.merge_q1(z_h, z_l))?)?
            }
            Class::Two => return self.waiting_raw(class, s),
        };
        finite("waiting-time LST", v)
    }

    pub fn waiting_time_lst(&self, class: Class, s: f64) -> Result<f64, TransformError> {
        check_range("waiting-time LST", s, 0.0, self.waiting_range(class))?;
        self.waiting_raw(class, s)
    }

    /// Waiting-time LST through `G_1` and `H_1` (identical for class 2).
    pub fn waiting_time_lst_alt(&self, class: Class, s: f64) -> Result<f64, TransformError> {
        check_range("waiting-time LST", s, 0.0, self.waiting_range(class))?;
        self.waiting_alt_raw(class, s)
    }
}
