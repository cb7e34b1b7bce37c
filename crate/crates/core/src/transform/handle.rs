use super::busy::BusyPeriod;
use super::TransformEngine;
use crate::error::TransformError;
use crate::model::{Class, Queue};

/// Every scalar transform the engine exposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Transform {
    Service(Class),
    BusyPeriod(BusyPeriod),
    CompletionTime,
    /// `K_ij`: arrivals to the second queue during a busy period of the first.
    Arrivals(Queue, Queue),
    /// Content of the other queue at a visit end of this one.
    VisitEnd(Queue),
    /// Marginal of the polling-epoch PGF at a visit beginning of the first
    /// queue, counting customers of the second.
    PollingEpoch(Queue, Queue),
    G1Direct,
    G1Dsa,
    H1,
    H1Deterministic,
    KDirect,
    KComposed,
    KDeterministic,
    KDeterministicComposed,
    Intervisit(Queue),
    Cycle(Queue),
    Waiting(Class),
    WaitingAlt(Class),
    /// Marginal of the arbitrary-time PGF for one class.
    ArbitraryTime(Class),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    /// Laplace-Stieltjes transform, identity point `s = 0`.
    Lst,
    /// Probability generating function, identity point `z = 1`.
    Pgf,
}

impl Transform {
    pub fn kind(self) -> TransformKind {
        match self {
            Transform::Service(_)
            | Transform::BusyPeriod(_)
            | Transform::CompletionTime
            | Transform::Intervisit(_)
            | Transform::Cycle(_)
            | Transform::Waiting(_)
            | Transform::WaitingAlt(_) => TransformKind::Lst,
            _ => TransformKind::Pgf,
        }
    }

    /// All transforms, for sweeping checks.
    pub fn all() -> Vec<Transform> {
        let mut v = Vec::new();
        for c in Class::ALL {
            v.push(Transform::Service(c));
            v.push(Transform::Waiting(c));
            v.push(Transform::WaitingAlt(c));
            v.push(Transform::ArbitraryTime(c));
        }
        for b in [BusyPeriod::Q1, BusyPeriod::Q2, BusyPeriod::H, BusyPeriod::LPrime] {
            v.push(Transform::BusyPeriod(b));
        }
        v.push(Transform::CompletionTime);
        for q in Queue::ALL {
            for p in Queue::ALL {
                v.push(Transform::Arrivals(q, p));
                v.push(Transform::PollingEpoch(q, p));
            }
            v.push(Transform::VisitEnd(q));
            v.push(Transform::Intervisit(q));
            v.push(Transform::Cycle(q));
        }
        v.extend([
            Transform::G1Direct,
            Transform::G1Dsa,
            Transform::H1,
            Transform::H1Deterministic,
            Transform::KDirect,
            Transform::KComposed,
            Transform::KDeterministic,
            Transform::KDeterministicComposed,
        ]);
        v
    }
}

/// A transform bound to an engine: evaluable at a single real argument.
#[derive(Clone, Debug)]
pub struct TransformHandle {
    engine: TransformEngine,
    transform: Transform,
}

impl TransformEngine {
    pub fn handle(&self, transform: Transform) -> TransformHandle {
        TransformHandle {
            engine: self.clone(),
            transform,
        }
    }
}

impl TransformHandle {
    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn kind(&self) -> TransformKind {
        self.transform.kind()
    }

    pub fn engine(&self) -> &TransformEngine {
        &self.engine
    }

    pub fn identity_point(&self) -> f64 {
        match self.kind() {
            TransformKind::Lst => 0.0,
            TransformKind::Pgf => 1.0,
        }
    }

    /// Admissible argument interval.
    pub fn domain(&self) -> Result<(f64, f64), TransformError> {
        let e = &self.engine;
        Ok(match self.transform {
            Transform::Intervisit(q) => (0.0, e.intervisit_range(q)),
            Transform::Cycle(q) => (0.0, e.cycle_range(q)?),
            Transform::Waiting(c) | Transform::WaitingAlt(c) => (0.0, e.waiting_range(c)),
            t if t.kind() == TransformKind::Lst => (0.0, f64::INFINITY),
            _ => (0.0, 1.0),
        })
    }

    /// Evaluates inside the admissible domain.
    pub fn eval(&self, x: f64) -> Result<f64, TransformError> {
        let (lo, hi) = self.domain()?;
        if !(x >= lo && x <= hi) {
            return Err(TransformError::Domain {
                what: "transform handle",
                arg: x,
                lo,
                hi,
            });
        }
        self.eval_raw(x)
    }

    /// Evaluates the analytic continuation without a domain check. Used for
    /// two-sided finite differences around the identity point.
    pub fn eval_raw(&self, x: f64) -> Result<f64, TransformError> {
        let e = &self.engine;
        match self.transform {
            Transform::Service(c) => Ok(e.service_lst(c, x)),
            Transform::BusyPeriod(b) => e.theta(b, x),
            Transform::CompletionTime => e.completion_raw(x),
            Transform::Arrivals(q, p) => e.k_raw(q, p, x),
            Transform::VisitEnd(Queue::Q1) => e.u1_raw(x),
            Transform::VisitEnd(Queue::Q2) => e.u2_raw(x),
            Transform::PollingEpoch(at, Queue::Q1) => e.polling_raw(at, x, 1.0),
            Transform::PollingEpoch(at, Queue::Q2) => e.polling_raw(at, 1.0, x),
            Transform::G1Direct => e.g1_direct_raw(x),
            Transform::G1Dsa => e.g1_dsa_raw(x),
            Transform::H1 => e.h1_raw(x),
            Transform::H1Deterministic => e.h1_fluid_raw(x),
            Transform::KDirect => e.k_direct_raw(x),
            Transform::KComposed => e.k_composed_raw(x),
            Transform::KDeterministic => e.k_fluid_raw(x),
            Transform::KDeterministicComposed => e.k_fluid_composed_raw(x),
            Transform::Intervisit(q) => e.intervisit_raw(q, x),
            Transform::Cycle(q) => e.cycle_raw(q, x),
            Transform::Waiting(c) => e.waiting_raw(c, x),
            Transform::WaitingAlt(c) => e.waiting_alt_raw(c, x),
            Transform::ArbitraryTime(Class::H) => e.arbitrary_raw(x, 1.0, 1.0),
            Transform::ArbitraryTime(Class::L) => e.arbitrary_raw(1.0, x, 1.0),
            Transform::ArbitraryTime(Class::Two) => e.arbitrary_raw(1.0, 1.0, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::table1_config;

    #[test]
    fn every_transform_is_one_at_identity() {
        let e = TransformEngine::new(&table1_config(0.5)).unwrap();
        for t in Transform::all() {
            let h = e.handle(t);
            let v = h.eval(h.identity_point()).unwrap();
            assert!((v - 1.0).abs() <= 1e-12, "{t:?}: {v}");
        }
    }

    #[test]
    fn values_in_unit_interval() {
        let e = TransformEngine::new(&table1_config(0.5)).unwrap();
        for t in Transform::all() {
            let h = e.handle(t);
            let (lo, hi) = h.domain().unwrap();
            let hi = hi.min(5.0);
            for k in 0..=8 {
                let x = lo + (hi - lo) * k as f64 / 8.0;
                let v = h.eval(x).unwrap();
                assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{t:?} at {x}: {v}");
            }
        }
    }

    #[test]
    fn handles_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<TransformHandle>();
        check::<TransformEngine>();
    }
}
