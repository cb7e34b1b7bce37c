//! Empirical distribution functions, Kolmogorov-Smirnov distances and
//! batch-means confidence intervals.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::engine::SampleSet;
use crate::error::StatsError;
use crate::model::{Class, Queue};

/// Right-continuous empirical CDF.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

impl EmpiricalCdf {
    pub fn eval(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x <= t) as f64 / self.sorted.len() as f64
    }

    /// Left limit `P(X < t)`.
    pub fn eval_left(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&x| x < t) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Empirical `p`-quantile (lower), `p` in `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// Supremum distance to `reference`, exact for a step function against
    /// any CDF: both one-sided gaps are checked at every sample point.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, reference: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let below = i as f64 / n;
            let upto = j as f64 / n;
            d = d.max((upto - reference(x)).abs());
            d = d.max((below - reference(x.next_down())).abs());
            i = j;
        }
        d
    }
}

pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], reference: F) -> Result<f64, StatsError> {
    Ok(empirical_cdf(samples)?.ks_distance(reference))
}

/// Mean, variance and a batch-means 95% confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// Half-width of the interval, absent with too few samples.
    pub half_width: Option<f64>,
}

impl Estimate {
    pub fn interval(&self) -> Option<(f64, f64)> {
        self.half_width.map(|h| (self.mean - h, self.mean + h))
    }

    pub fn covers(&self, value: f64) -> Option<bool> {
        self.interval().map(|(lo, hi)| lo <= value && value <= hi)
    }
}

pub const BATCHES: usize = 30;
const MIN_PER_BATCH: usize = 2;

pub fn estimate(samples: &[f64]) -> Result<Estimate, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok(Estimate {
        n,
        mean,
        variance,
        half_width: batch_means_half_width(samples, BATCHES).ok(),
    })
}

/// Half-width of the 95% Student-t interval over `batches` batch means.
pub fn batch_means_half_width(samples: &[f64], batches: usize) -> Result<f64, StatsError> {
    let n = samples.len();
    if batches < 2 || n < batches * MIN_PER_BATCH {
        return Err(StatsError::TooFewForBatching { n, batches });
    }
    let size = n / batches;
    let means: Vec<f64> = samples
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (batches - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (batches - 1) as f64)
        .expect("valid degrees of freedom")
        .inverse_cdf(0.975);
    Ok(t * (var / batches as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub waits: [Option<Estimate>; 3],
    pub cycles: [Option<Estimate>; 2],
    pub mean_in_system: [f64; 3],
}

impl Summary {
    pub fn wait(&self, class: Class) -> Option<&Estimate> {
        self.waits[class.index()].as_ref()
    }

    pub fn cycle(&self, queue: Queue) -> Option<&Estimate> {
        self.cycles[queue.index()].as_ref()
    }
}

/// Per-class and per-queue estimates; empty sample lists give `None`.
pub fn summarize(samples: &SampleSet) -> Summary {
    Summary {
        waits: std::array::from_fn(|i| estimate(&samples.waits[i]).ok()),
        cycles: std::array::from_fn(|i| estimate(&samples.cycles[i]).ok()),
        mean_in_system: samples.mean_in_system,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn step_function() {
        let f = empirical_cdf(&[3.0, 1.0, 2.0]).unwrap();
        assert!((f.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(f.eval(10.0), 1.0);
        assert!((f.eval_left(2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn ks_examples() {
        let unif = |t: f64| t.clamp(0.0, 1.0);
        assert_eq!(ks_distance(&[0.0], unif).unwrap(), 1.0);
        assert_eq!(ks_distance(&[0.5], unif).unwrap(), 0.5);
        assert!(ks_distance(&[], unif).is_err());
    }

    #[test]
    fn ks_self_draw() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let e = Exp::new(1.3).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| e.sample(&mut rng)).collect();
        let d = ks_distance(&xs, |t| if t <= 0.0 { 0.0 } else { 1.0 - (-1.3 * t).exp() }).unwrap();
        assert!(d < 0.01, "{d}");
    }

    #[test]
    fn ks_sees_atoms() {
        // half the mass at zero in the reference, none in the sample
        let xs = [0.5, 0.6, 0.7, 0.8];
        let reference = |t: f64| if t < 0.0 { 0.0 } else { 0.5 + 0.5 * t.min(1.0) };
        let d = ks_distance(&xs, reference).unwrap();
        assert!((d - 0.75).abs() < 1e-12, "{d}");
    }

    #[test]
    fn constant_samples_zero_width() {
        let est = estimate(&vec![2.5; 600]).unwrap();
        assert_eq!(est.mean, 2.5);
        assert_eq!(est.half_width, Some(0.0));
        assert_eq!(est.covers(2.5), Some(true));
    }

    #[test]
    fn too_few_for_batching() {
        let est = estimate(&[1.0, 2.0, 3.0]).unwrap();
        assert!(est.half_width.is_none());
        assert!(matches!(
            batch_means_half_width(&[1.0; 10], 30),
            Err(StatsError::TooFewForBatching { n: 10, batches: 30 })
        ));
    }

    #[test]
    fn quantiles() {
        let f = empirical_cdf(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(f.quantile(0.5), 2.0);
        assert_eq!(f.quantile(1.0), 4.0);
        assert_eq!(f.quantile(0.0), 1.0);
        assert_eq!(f.max(), 4.0);
    }
}
