use super::{check_range, check_unit, finite, TransformEngine};
use crate::error::TransformError;
use crate::model::{Class, Queue};

/// The M/G/1 busy periods appearing in the transforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BusyPeriod {
    /// Exhaustive service of Q1, both classes mixed.
    Q1,
    Q2,
    /// High-priority class alone.
    H,
    /// Low-priority class with completion times as service times.
    LPrime,
}

impl TransformEngine {
    /// Minimal root of `x = lst(s + lambda (1 - x))`, iterated from 0.
    ///
    /// The iteration runs on `y = 1 - x`, with `one_minus(u) = 1 - lst(u)`,
    /// so small arguments keep full relative precision. It converges
    /// linearly and stops once the distance to the root, estimated from the
    /// ratio of successive steps, is below tolerance.
    fn fixed_point_complement<F>(&self, s: f64, lambda: f64, one_minus: F) -> Result<f64, TransformError>
    where
        F: Fn(f64) -> Result<f64, TransformError>,
    {
        if s == 0.0 {
            return Ok(0.0);
        }
        let mut y = 1.0;
        let mut residual = f64::INFINITY;
        for _ in 0..self.opts.max_iterations {
            let next = one_minus(s + lambda * y)?;
            if !next.is_finite() {
                return Err(TransformError::NonFinite("busy-period fixed point"));
            }
            let step = (y - next).abs();
            let rate = if residual.is_finite() && residual > 0.0 {
                (step / residual).min(0.999_999)
            } else {
                f64::NAN
            };
            residual = step;
            y = next;
            let remaining = residual * rate / (1.0 - rate);
            if remaining <= self.opts.fixpoint_tol * y.abs().min(1.0) || residual <= 4.0 * f64::EPSILON * y.abs() {
                return Ok(y);
            }
        }
        Err(TransformError::NonConvergence {
            s,
            iterations: self.opts.max_iterations,
            residual,
        })
    }

    pub(crate) fn service_lst(&self, class: Class, s: f64) -> f64 {
        self.config.service(class).lst(s)
    }

    /// Service LST of an arbitrary Q1 customer.
    fn q1_service_lst(&self, s: f64) -> f64 {
        let c = &self.config;
        (c.lambda_h * c.b_h.lst(s) + c.lambda_l * c.b_l.lst(s)) / self.model.lambda_1
    }

    fn q1_service_complement(&self, s: f64) -> f64 {
        let c = &self.config;
        (c.lambda_h * c.b_h.one_minus_lst(s) + c.lambda_l * c.b_l.one_minus_lst(s)) / self.model.lambda_1
    }

    /// `1 - theta(which, s)`, accurate also when it is tiny.
    pub(crate) fn theta_complement(&self, which: BusyPeriod, s: f64) -> Result<f64, TransformError> {
        let c = &self.config;
        match which {
            BusyPeriod::Q1 => {
                self.fixed_point_complement(s, self.model.lambda_1, |x| Ok(self.q1_service_complement(x)))
            }
            BusyPeriod::Q2 => self.fixed_point_complement(s, c.lambda_2, |x| Ok(c.b_2.one_minus_lst(x))),
            BusyPeriod::H => self.fixed_point_complement(s, c.lambda_h, |x| Ok(c.b_h.one_minus_lst(x))),
            BusyPeriod::LPrime => self.fixed_point_complement(s, c.lambda_l, |x| self.completion_complement(x)),
        }
    }

    pub(crate) fn theta(&self, which: BusyPeriod, s: f64) -> Result<f64, TransformError> {
        Ok(1.0 - self.theta_complement(which, s)?)
    }

    fn completion_complement(&self, s: f64) -> Result<f64, TransformError> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let gap_h = self.theta_complement(BusyPeriod::H, s)?;
        finite(
            "completion time",
            self.config.b_l.one_minus_lst(s + self.config.lambda_h * gap_h),
        )
    }

    pub(crate) fn completion_raw(&self, s: f64) -> Result<f64, TransformError> {
        Ok(1.0 - self.completion_complement(s)?)
    }

    /// LST of the busy period `which` at `s >= 0`.
    pub fn busy_period_lst(&self, which: BusyPeriod, s: f64) -> Result<f64, TransformError> {
        check_range("busy-period LST", s, 0.0, f64::INFINITY)?;
        self.theta(which, s)
    }

    /// `|x - B(s + lambda (1 - x))|` at the computed root.
    pub fn kendall_residual(&self, which: BusyPeriod, s: f64) -> Result<f64, TransformError> {
        let x = self.busy_period_lst(which, s)?;
        let c = &self.config;
        let arg = |lambda: f64| s + lambda * (1.0 - x);
        let image = match which {
            BusyPeriod::Q1 => self.q1_service_lst(arg(self.model.lambda_1)),
            BusyPeriod::Q2 => c.b_2.lst(arg(c.lambda_2)),
            BusyPeriod::H => c.b_h.lst(arg(c.lambda_h)),
            BusyPeriod::LPrime => self.completion_raw(arg(c.lambda_l))?,
        };
        Ok((x - image).abs())
    }

    /// Completion time of a low-priority customer: its service plus the
    /// high-priority busy periods it triggers.
    pub fn completion_time_lst(&self, s: f64) -> Result<f64, TransformError> {
        check_range("completion-time LST", s, 0.0, f64::INFINITY)?;
        self.completion_raw(s)
    }

    pub(crate) fn k_raw(&self, at: Queue, source: Queue, z: f64) -> Result<f64, TransformError> {
        let which = match at {
            Queue::Q1 => BusyPeriod::Q1,
            Queue::Q2 => BusyPeriod::Q2,
        };
        self.theta(which, self.lambda(source) * (1.0 - z))
    }

    /// PGF of the number of arrivals to `source` during a busy period of `at`.
    pub fn arrivals_pgf(&self, at: Queue, source: Queue, z: f64) -> Result<f64, TransformError> {
        check_unit("arrivals PGF", z)?;
        self.k_raw(at, source, z)
    }

    pub(crate) fn m_raw(&self, from: Queue, to: Queue, z1: f64, z2: f64) -> f64 {
        self.config.switchover(from, to).lst(self.arrival_exponent(z1, z2))
    }

    /// Joint PGF of the arrivals at both queues during switch-over `S_{from,to}`.
    pub fn switchover_pgf(&self, from: Queue, to: Queue, z1: f64, z2: f64) -> Result<f64, TransformError> {
        check_unit("switch-over PGF", z1)?;
        check_unit("switch-over PGF", z2)?;
        Ok(self.m_raw(from, to, z1, z2))
    }
}
