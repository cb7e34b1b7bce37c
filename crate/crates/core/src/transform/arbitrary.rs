//! Joint PGF of the numbers of H, L and type-2 customers in the system at
//! an arbitrary epoch, by conditioning on what the server is doing.

use super::busy::BusyPeriod;
use super::{check_unit, finite, TransformEngine};
use crate::error::TransformError;
use crate::model::Queue;

impl TransformEngine {
    pub(crate) fn arbitrary_raw(&self, z_h: f64, z_l: f64, z2: f64) -> Result<f64, TransformError> {
        self.require_switching("the arbitrary-time PGF")?;
        if z_h == 1.0 && z_l == 1.0 && z2 == 1.0 {
            return Ok(1.0);
        }
        let c = &self.config;
        let m = &self.model;
        let (lh, ll, l2) = (c.lambda_h, c.lambda_l, c.lambda_2);
        let lam = lh * (1.0 - z_h) + ll * (1.0 - z_l) + l2 * (1.0 - z2);
        let y = self.merge_q1(z_h, z_l);
        let h_h = self.theta(BusyPeriod::H, ll * (1.0 - z_l) + l2 * (1.0 - z2))?;

        let w1 = m.pi_1 * (1.0 - m.rho) / m.sigma;
        let w2 = m.pi_2 * (1.0 - m.rho) / m.sigma;
        let bh_lam = c.b_h.lst(lam);
        let bh_gap = z_h - bh_lam;

        let u1 = self.u1_raw(z2)?;
        let u2 = self.u2_raw(y)?;
        let v_b1_late = self.polling_raw(Queue::Q1, self.merge_q1(h_h, z_l), z2)?;

        // high-priority service in progress
        let v_b1 = self.polling_raw(Queue::Q1, y, z2)?;
        let part_h = w1 * z_h * (v_b1 - v_b1_late) / bh_gap * c.b_h.one_minus_lst(lam) / lam;

        // type-2 service in progress
        let v_b2 = self.polling_raw(Queue::Q2, y, z2)?;
        let part_2 = w2 * z2 * (v_b2 - u2) / (z2 - c.b_2.lst(lam)) * c.b_2.one_minus_lst(lam) / lam;

        // inside a low-priority completion time: the L service itself or a
        // high-priority busy period it triggered
        let completion_arg = ll * (1.0 - z_l) + l2 * (1.0 - z2);
        let bl_start = c.b_l.lst(lam);
        let bl_after = c.b_l.lst(lh * (1.0 - h_h) + completion_arg);
        let inner = z_l * c.b_l.one_minus_lst(lam) + z_h * (bl_start - bl_after) * c.b_h.one_minus_lst(lam) / bh_gap;
        let part_l = if completion_arg == 0.0 {
            // both the difference and the gap vanish; their ratio tends to
            // lambda_L E C_1, which cancels the weight to lambda_L
            ll * inner / lam
        } else {
            let l_gap = z_l - self.completion_raw(completion_arg)?;
            w1 * (v_b1_late - u1) / l_gap * inner / lam
        };

        // switch-over in progress; the mean switch-over lengths cancel
        let mut part_s = 0.0;
        for from in Queue::ALL {
            let left = match from {
                Queue::Q1 => u1,
                Queue::Q2 => u2,
            };
            for to in Queue::ALL {
                let weight = m.r[from.index()][to.index()] * m.pi(to);
                part_s += weight * left * c.switchover(from, to).one_minus_lst(lam) / lam;
            }
        }
        part_s *= (1.0 - m.rho) / m.sigma;

        finite("arbitrary-time PGF", part_h + part_l + part_2 + part_s)
    }

    /// Joint PGF of the H, L and type-2 numbers in the system (waiting or in
    /// service) at an arbitrary epoch.
    pub fn arbitrary_time_pgf(&self, z_h: f64, z_l: f64, z2: f64) -> Result<f64, TransformError> {
        for z in [z_h, z_l, z2] {
            check_unit("arbitrary-time PGF", z)?;
        }
        self.arbitrary_raw(z_h, z_l, z2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{table1_config, Class};
    use crate::transform::{lst_moment, EvalOptions, Transform};

    #[test]
    fn normalization_and_range() {
        let e = TransformEngine::new(&table1_config(0.5)).unwrap();
        assert_eq!(e.arbitrary_time_pgf(1.0, 1.0, 1.0).unwrap(), 1.0);
        for &(a, b, c) in &[(0.0, 0.0, 0.0), (0.5, 0.5, 0.5), (0.9, 0.2, 0.7), (1.0, 1.0, 0.3)] {
            let v = e.arbitrary_time_pgf(a, b, c).unwrap();
            assert!((0.0..=1.0).contains(&v), "{v}");
        }
        // each marginal tends to 1 at the identity
        for d in [1e-3, 1e-5] {
            for (a, b, c) in [(1.0 - d, 1.0, 1.0), (1.0, 1.0 - d, 1.0), (1.0, 1.0, 1.0 - d)] {
                let v = e.arbitrary_time_pgf(a, b, c).unwrap();
                assert!(v < 1.0 && 1.0 - v < 5.0 * d, "{d}: {v}");
            }
        }
    }

    #[test]
    fn littles_law_per_class() {
        let c = table1_config(0.5);
        let e = TransformEngine::with_options(&c, EvalOptions::precise()).unwrap();
        for class in Class::ALL {
            let el = lst_moment(&e.handle(Transform::ArbitraryTime(class)), 1).unwrap();
            let ew = lst_moment(&e.handle(Transform::Waiting(class)), 1).unwrap();
            let expected = c.arrival_rate(class) * (ew + c.service(class).mean());
            assert!(((el - expected) / expected).abs() < 1e-6, "{class}: {el} vs {expected}");
        }
    }
}
