//! Descendant-set products: queue contents at visit ends, polling epochs,
//! and the `G_1`, `H_1`, `K` transforms.

use super::busy::BusyPeriod;
use super::{check_unit, finite, TransformEngine};
use crate::error::TransformError;
use crate::model::Queue;

impl TransformEngine {
    /// LST of the aggregated switch-over from leaving Q1 until the
    /// following switch-over into Q1 begins.
    pub(crate) fn r1_tilde(&self, s: f64) -> f64 {
        let p2 = self.config.p_2;
        (1.0 - p2) * self.config.s_12.lst(s) / (1.0 - p2 * self.config.s_22.lst(s))
    }

    pub(crate) fn r2_tilde(&self, s: f64) -> f64 {
        let p1 = self.config.p_1;
        (1.0 - p1) * self.config.s_21.lst(s) / (1.0 - p1 * self.config.s_11.lst(s))
    }

    /// Both aggregated switch-overs replaced by their means.
    fn r1_fluid(&self, s: f64) -> f64 {
        (-self.model.r_1 * s).exp()
    }

    fn r2_fluid(&self, s: f64) -> f64 {
        (-self.model.r_2 * s).exp()
    }

    fn truncated(&self, factor: f64) -> TransformError {
        TransformError::Truncation {
            depth: self.opts.max_depth,
            deviation: (factor - 1.0).abs(),
        }
    }

    /// PGF of the Q2 content at a Q1 visit end.
    pub(crate) fn u1_raw(&self, y: f64) -> Result<f64, TransformError> {
        let (l1, l2) = (self.model.lambda_1, self.config.lambda_2);
        let mut y = y;
        let mut product = 1.0;
        let mut factor = f64::NAN;
        for _ in 0..self.opts.max_depth {
            let k = self.k_raw(Queue::Q1, Queue::Q2, y)?;
            let y_next = self.k_raw(Queue::Q2, Queue::Q1, k)?;
            let a = l1 * (1.0 - k);
            factor = self.r2_tilde(a + l2 * (1.0 - y)) * self.r1_tilde(a + l2 * (1.0 - y_next));
            product *= factor;
            let deviation = (1.0 - y_next).abs().max((1.0 - k).abs());
            if self.product_converged(factor, deviation, (y_next - y).abs()) {
                return finite("visit-end PGF", product);
            }
            y = y_next;
        }
        Err(self.truncated(factor))
    }

    /// PGF of the Q1 content at a Q2 visit end.
    pub(crate) fn u2_raw(&self, x: f64) -> Result<f64, TransformError> {
        let (l1, l2) = (self.model.lambda_1, self.config.lambda_2);
        let mut x = x;
        let mut product = 1.0;
        let mut factor = f64::NAN;
        for _ in 0..self.opts.max_depth {
            let k = self.k_raw(Queue::Q2, Queue::Q1, x)?;
            let x_next = self.k_raw(Queue::Q1, Queue::Q2, k)?;
            let b = l2 * (1.0 - k);
            factor = self.r1_tilde(l1 * (1.0 - x) + b) * self.r2_tilde(l1 * (1.0 - x_next) + b);
            product *= factor;
            let deviation = (1.0 - x_next).abs().max((1.0 - k).abs());
            if self.product_converged(factor, deviation, (x_next - x).abs()) {
                return finite("visit-end PGF", product);
            }
            x = x_next;
        }
        Err(self.truncated(factor))
    }

    /// PGF of the content of the other queue at a visit end of `queue`
    /// (the visited queue itself is empty then).
    pub fn visit_end_pgf(&self, queue: Queue, z: f64) -> Result<f64, TransformError> {
        check_unit("visit-end PGF", z)?;
        match queue {
            Queue::Q1 => self.u1_raw(z),
            Queue::Q2 => self.u2_raw(z),
        }
    }

    pub(crate) fn polling_raw(&self, queue: Queue, z1: f64, z2: f64) -> Result<f64, TransformError> {
        let r = &self.model.r;
        let j = queue.index();
        let from_q1 = r[0][j] * self.m_raw(Queue::Q1, queue, z1, z2);
        let from_q2 = r[1][j] * self.m_raw(Queue::Q2, queue, z1, z2);
        let mut v = 0.0;
        if from_q1 != 0.0 {
            v += from_q1 * self.u1_raw(z2)?;
        }
        if from_q2 != 0.0 {
            v += from_q2 * self.u2_raw(z1)?;
        }
        finite("polling-epoch PGF", v)
    }

    /// Joint PGF of the two queue contents at a visit beginning of `queue`.
    pub fn polling_epoch_pgf(&self, queue: Queue, z1: f64, z2: f64) -> Result<f64, TransformError> {
        check_unit("polling-epoch PGF", z1)?;
        check_unit("polling-epoch PGF", z2)?;
        self.polling_raw(queue, z1, z2)
    }

    pub(crate) fn priority_polling_raw(
        &self,
        queue: Queue,
        z_h: f64,
        z_l: f64,
        z2: f64,
    ) -> Result<f64, TransformError> {
        self.polling_raw(queue, self.merge_q1(z_h, z_l), z2)
    }

    /// Joint PGF of the H, L and type-2 contents at a visit beginning of `queue`.
    pub fn priority_epoch_pgf(&self, queue: Queue, z_h: f64, z_l: f64, z2: f64) -> Result<f64, TransformError> {
        for z in [z_h, z_l, z2] {
            check_unit("priority polling-epoch PGF", z)?;
        }
        self.priority_polling_raw(queue, z_h, z_l, z2)
    }

    fn h1_with<R1, R2>(&self, z: f64, r1: R1, r2: R2) -> Result<f64, TransformError>
    where
        R1: Fn(f64) -> f64,
        R2: Fn(f64) -> f64,
    {
        let (l1, l2) = (self.model.lambda_1, self.config.lambda_2);
        let (mut a1_prev, mut a2_prev) = (z, 1.0);
        let mut product = 1.0;
        let mut factor = f64::NAN;
        for _ in 0..self.opts.max_depth {
            let a2 = self.k_raw(Queue::Q2, Queue::Q1, a1_prev)?;
            let q = l1 * (1.0 - a1_prev);
            factor = r1(q + l2 * (1.0 - a2)) * r2(q + l2 * (1.0 - a2_prev));
            product *= factor;
            let a1 = self.k_raw(Queue::Q1, Queue::Q2, a2)?;
            let deviation = (1.0 - a1).abs().max((1.0 - a2).abs());
            if self.product_converged(factor, deviation, (a1 - a1_prev).abs()) {
                return finite("H1", product);
            }
            a1_prev = a1;
            a2_prev = a2;
        }
        Err(self.truncated(factor))
    }

    pub(crate) fn h1_raw(&self, z: f64) -> Result<f64, TransformError> {
        self.h1_with(z, |s| self.r1_tilde(s), |s| self.r2_tilde(s))
    }

    pub(crate) fn h1_fluid_raw(&self, z: f64) -> Result<f64, TransformError> {
        self.h1_with(z, |s| self.r1_fluid(s), |s| self.r2_fluid(s))
    }

    /// `H_1` from the descendant-set product with the exact aggregated
    /// switch-over transforms.
    pub fn dsa_h1(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("H1", z)?;
        self.h1_raw(z)
    }

    /// `H_1` with each aggregated switch-over replaced by its mean, the
    /// form used for deterministic switch-overs.
    pub fn dsa_h1_deterministic(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("H1", z)?;
        self.h1_fluid_raw(z)
    }

    pub(crate) fn g1_direct_raw(&self, z: f64) -> Result<f64, TransformError> {
        Ok(self.m_raw(Queue::Q2, Queue::Q1, z, 1.0) * self.u2_raw(z)?)
    }

    pub(crate) fn g1_dsa_raw(&self, z: f64) -> Result<f64, TransformError> {
        let r = &self.model.r;
        let tail = (1.0 - r[0][0] * self.m_raw(Queue::Q1, Queue::Q1, z, 1.0)) / r[1][0];
        Ok(self.h1_raw(z)? * tail)
    }

    /// `G_1` as the switch-over PGF times the visit-end product.
    pub fn g1_direct(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("G1", z)?;
        self.g1_direct_raw(z)
    }

    /// `G_1` through `H_1`.
    pub fn dsa_g1(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("G1", z)?;
        self.g1_dsa_raw(z)
    }

    fn k_with<R1, R2>(&self, z: f64, r1: R1, r2: R2) -> Result<f64, TransformError>
    where
        R1: Fn(f64) -> f64,
        R2: Fn(f64) -> f64,
    {
        let c = &self.config;
        let (lh, ll, l2) = (c.lambda_h, c.lambda_l, c.lambda_2);
        let mut b_h = self.theta(BusyPeriod::H, ll * (1.0 - z))?;
        let mut b_l = z;
        let mut b_2 = 1.0;
        let mut product = 1.0;
        let mut factor = f64::NAN;
        for _ in 0..self.opts.max_depth {
            let q1 = lh * (1.0 - b_h) + ll * (1.0 - b_l);
            let b_2_next = self.theta(BusyPeriod::Q2, q1)?;
            factor = r1(q1 + l2 * (1.0 - b_2_next)) * r2(q1 + l2 * (1.0 - b_2));
            product *= factor;
            let x = l2 * (1.0 - b_2_next);
            let b_l_next = self.theta(BusyPeriod::LPrime, x)?;
            let b_h_next = self.theta(BusyPeriod::H, ll * (1.0 - b_l_next) + x)?;
            let deviation = (1.0 - b_l_next)
                .abs()
                .max((1.0 - b_h_next).abs())
                .max((1.0 - b_2_next).abs());
            let change = (b_l_next - b_l).abs().max((b_h_next - b_h).abs());
            if self.product_converged(factor, deviation, change) {
                return finite("K", product);
            }
            b_h = b_h_next;
            b_l = b_l_next;
            b_2 = b_2_next;
        }
        Err(self.truncated(factor))
    }

    /// Argument of `H_1` that turns it into `K`.
    fn k_substitution(&self, z: f64) -> Result<f64, TransformError> {
        let c = &self.config;
        let theta_h = self.theta(BusyPeriod::H, c.lambda_l * (1.0 - z))?;
        Ok(self.merge_q1(theta_h, z))
    }

    pub(crate) fn k_direct_raw(&self, z: f64) -> Result<f64, TransformError> {
        self.k_with(z, |s| self.r1_tilde(s), |s| self.r2_tilde(s))
    }

    pub(crate) fn k_composed_raw(&self, z: f64) -> Result<f64, TransformError> {
        self.h1_raw(self.k_substitution(z)?)
    }

    pub(crate) fn k_fluid_raw(&self, z: f64) -> Result<f64, TransformError> {
        self.k_with(z, |s| self.r1_fluid(s), |s| self.r2_fluid(s))
    }

    pub(crate) fn k_fluid_composed_raw(&self, z: f64) -> Result<f64, TransformError> {
        self.h1_fluid_raw(self.k_substitution(z)?)
    }

    /// `K` from its own product over the H, L and type-2 descendant recursion.
    pub fn dsa_k(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("K", z)?;
        self.k_direct_raw(z)
    }

    /// `K` as `H_1` evaluated at the merged busy-period argument.
    pub fn dsa_k_composed(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("K", z)?;
        self.k_composed_raw(z)
    }

    /// Deterministic-switch-over form of [`Self::dsa_k`].
    pub fn dsa_k_deterministic(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("K", z)?;
        self.k_fluid_raw(z)
    }

    /// Deterministic-switch-over form of [`Self::dsa_k_composed`].
    pub fn dsa_k_deterministic_composed(&self, z: f64) -> Result<f64, TransformError> {
        check_unit("K", z)?;
        self.k_fluid_composed_raw(z)
    }
}
