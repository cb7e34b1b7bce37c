//! Sweeps toward a limit regime: simulate each point, scale the waiting
//! times and compare their empirical CDFs with the limit law.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use markov_polling::{
    empirical_cdf, heavy_traffic_params, limit_cdf_fn, run_simulation, AsymptoticParams, Class, Regime, SimOptions,
    SystemConfig,
};
use rayon::prelude::*;

use crate::error::CliError;
use crate::output::{create_dir, write_csv, write_text};
use crate::scenario::check_config;

/// Points on every emitted CDF grid.
pub const GRID_POINTS: usize = 400;
/// The grid ends at this quantile of the pooled scaled samples.
pub const GRID_QUANTILE: f64 = 0.995;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    HeavyTraffic,
    LargeSwitchover,
    /// Experimental: convergence in this regime is slow.
    DoubleLimit,
}

impl StudyKind {
    pub fn regime(self) -> Regime {
        match self {
            StudyKind::HeavyTraffic => Regime::HeavyTraffic,
            StudyKind::LargeSwitchover => Regime::LargeSwitchover,
            StudyKind::DoubleLimit => Regime::DoubleLimit,
        }
    }

    /// Name of the swept parameter.
    pub fn sweep_label(self) -> &'static str {
        match self {
            StudyKind::LargeSwitchover => "r",
            _ => "rho",
        }
    }

    pub fn default_sweep(self) -> Vec<f64> {
        match self {
            StudyKind::HeavyTraffic => vec![0.5, 0.8, 0.9, 0.95, 0.99],
            StudyKind::LargeSwitchover => vec![1.0, 10.0, 50.0, 100.0, 500.0],
            StudyKind::DoubleLimit => vec![0.9, 0.95, 0.99],
        }
    }

    pub fn default_served(self) -> u64 {
        match self {
            StudyKind::LargeSwitchover => 20_000,
            _ => 200_000,
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.regime().label())
    }
}

impl FromStr for StudyKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heavy-traffic" => Ok(StudyKind::HeavyTraffic),
            "large-switchover" => Ok(StudyKind::LargeSwitchover),
            "double-limit" => Ok(StudyKind::DoubleLimit),
            other => Err(CliError::Validation(format!("unknown study kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudySpec {
    pub kind: StudyKind,
    /// Loads for the heavy-traffic and double-limit studies, mean total
    /// switch-over times for the large-switch-over study.
    pub sweep: Vec<f64>,
    /// Configuration shape; loads or switch-overs are overridden per point.
    pub base: SystemConfig,
    /// Service starts per point, warm-up included.
    pub served: u64,
    pub warmup: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Mean total switch-over time of the double-limit study.
    pub double_limit_switchover: f64,
}

impl StudySpec {
    pub fn new(kind: StudyKind, base: SystemConfig, out_dir: impl Into<PathBuf>) -> Self {
        StudySpec {
            kind,
            sweep: kind.default_sweep(),
            base,
            served: kind.default_served(),
            warmup: 0.1,
            seed: 1,
            out_dir: out_dir.into(),
            double_limit_switchover: 100.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sweep.is_empty() {
            return Err(CliError::Validation("the sweep is empty".into()));
        }
        for &v in &self.sweep {
            let ok = match self.kind {
                StudyKind::LargeSwitchover => v.is_finite() && v > 0.0,
                _ => v > 0.0 && v < 1.0,
            };
            if !ok {
                let want = match self.kind {
                    StudyKind::LargeSwitchover => "r > 0",
                    _ => "0 < rho < 1",
                };
                return Err(CliError::Validation(format!("sweep value {v} violates {want}")));
            }
        }
        if self.served == 0 {
            return Err(CliError::Validation("served-customer target must be at least 1".into()));
        }
        if !(0.0..=0.9).contains(&self.warmup) {
            return Err(CliError::Validation(format!(
                "warm-up fraction {} outside [0, 0.9]",
                self.warmup
            )));
        }
        if self.kind == StudyKind::DoubleLimit && !(self.double_limit_switchover > 0.0) {
            return Err(CliError::Validation(
                "double-limit switch-over time must be positive".into(),
            ));
        }
        for &v in &self.sweep {
            check_config(&self.point_config(v))?;
        }
        Ok(())
    }

    pub fn point_config(&self, value: f64) -> SystemConfig {
        match self.kind {
            StudyKind::HeavyTraffic => self.base.with_total_load(value),
            StudyKind::LargeSwitchover => self.base.with_deterministic_total_switchover(value),
            StudyKind::DoubleLimit => self
                .base
                .with_total_load(value)
                .with_deterministic_total_switchover(self.double_limit_switchover),
        }
    }

    /// Factor applied to raw waiting times at a sweep point.
    pub fn scale_factor(&self, value: f64) -> f64 {
        match self.kind {
            StudyKind::HeavyTraffic => 1.0 - value,
            StudyKind::LargeSwitchover => 1.0 / value,
            StudyKind::DoubleLimit => (1.0 - value) / self.double_limit_switchover,
        }
    }

    /// Sweep values ordered toward the limit, duplicates removed.
    pub fn ordered_sweep(&self) -> Vec<f64> {
        let mut v = self.sweep.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Seed of the `index`-th sweep point: a splitmix64 step away from the root.
pub fn point_seed(root: u64, index: usize) -> u64 {
    let mut z = root.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub seed: u64,
    pub config: SystemConfig,
    pub params: AsymptoticParams,
    pub scale: f64,
    /// Scaled waiting times per class.
    pub scaled: [Vec<f64>; 3],
    pub ks: [Option<f64>; 3],
    pub max_scaled: [Option<f64>; 3],
    /// Upper end of the uniform limit, where the regime has one.
    pub endpoint: [Option<f64>; 3],
    pub served: u64,
    pub cdf_file: PathBuf,
}

#[derive(Clone, Debug)]
pub struct StudyOutcome {
    pub kind: StudyKind,
    pub points: Vec<SweepPoint>,
    /// Per class, whether KS did not grow from the previous point; absent
    /// for a single-point sweep.
    pub trend: Option<[Vec<bool>; 3]>,
    pub summary_csv: PathBuf,
    pub summary_txt: PathBuf,
}

impl StudyOutcome {
    pub fn point(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.value == value)
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_point(spec: &StudySpec, index: usize, value: f64) -> Result<SweepPoint, CliError> {
    let config = spec.point_config(value);
    let seed = point_seed(spec.seed, index);
    let samples = run_simulation(&config, &SimOptions::new(spec.served, spec.warmup, seed))?;
    let params = heavy_traffic_params(&config)?;
    let scale = spec.scale_factor(value);
    let regime = spec.kind.regime();
    let scaled: [Vec<f64>; 3] = Class::ALL.map(|c| samples.scaled_waits(c, scale));

    let mut ks = [None; 3];
    let mut max_scaled = [None; 3];
    let mut cdfs = Vec::new();
    for class in Class::ALL {
        let i = class.index();
        let limit = limit_cdf_fn(regime, class, &params);
        match empirical_cdf(&scaled[i]) {
            Ok(ecdf) => {
                ks[i] = Some(ecdf.ks_distance(&limit));
                max_scaled[i] = Some(ecdf.max());
                cdfs.push(Some(ecdf));
            }
            Err(_) => cdfs.push(None),
        }
    }
    let endpoint = Class::ALL.map(|c| params.uniform_endpoint(regime, c));

    let pooled: Vec<f64> = scaled.iter().flatten().copied().collect();
    let upper = match empirical_cdf(&pooled) {
        Ok(e) => e.quantile(GRID_QUANTILE),
        Err(_) => 0.0,
    };
    let limits: Vec<_> = Class::ALL.iter().map(|&c| limit_cdf_fn(regime, c, &params)).collect();
    let rows = (0..GRID_POINTS)
        .map(|k| {
            let t = upper * k as f64 / (GRID_POINTS - 1) as f64;
            let mut row = vec![t.to_string()];
            for (ecdf, limit) in cdfs.iter().zip(&limits) {
                row.push(ecdf.as_ref().map(|e| e.eval(t).to_string()).unwrap_or_default());
                row.push(limit(t).to_string());
            }
            row
        })
        .collect();
    let cdf_file = spec
        .out_dir
        .join(format!("cdf_{}_{}.csv", spec.kind.sweep_label(), value));
    write_csv(
        &cdf_file,
        &[
            "t",
            "empirical_H",
            "limit_H",
            "empirical_L",
            "limit_L",
            "empirical_2",
            "limit_2",
        ],
        rows,
    )?;

    Ok(SweepPoint {
        value,
        seed,
        config,
        params,
        scale,
        scaled,
        ks,
        max_scaled,
        endpoint,
        served: samples.served,
        cdf_file,
    })
}

fn trend(points: &[SweepPoint]) -> Option<[Vec<bool>; 3]> {
    if points.len() < 2 {
        return None;
    }
    Some(std::array::from_fn(|i| {
        points
            .windows(2)
            .map(|w| match (w[0].ks[i], w[1].ks[i]) {
                (Some(a), Some(b)) => b <= a,
                _ => true,
            })
            .collect()
    }))
}

/// Runs every sweep point (in parallel, each with its own seed) and writes
/// one CDF dataset per point plus `summary.csv` and `summary.txt`.
pub fn study(spec: &StudySpec) -> Result<StudyOutcome, CliError> {
    spec.validate()?;
    create_dir(&spec.out_dir)?;
    let sweep = spec.ordered_sweep();
    let points = sweep
        .par_iter()
        .enumerate()
        .map(|(i, &v)| run_point(spec, i, v))
        .collect::<Result<Vec<_>, _>>()?;
    let trend = trend(&points);

    let mut header: Vec<String> = ["kind", "sweep_value", "scale_factor", "served"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for prefix in ["samples", "ks", "max_scaled", "endpoint"] {
        for c in Class::ALL {
            header.push(format!("{prefix}_{c}"));
        }
    }
    if trend.is_some() {
        for c in Class::ALL {
            header.push(format!("trend_{c}"));
        }
    }
    let rows = points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut row = vec![
                spec.kind.to_string(),
                p.value.to_string(),
                p.scale.to_string(),
                p.served.to_string(),
            ];
            row.extend(p.scaled.iter().map(|s| s.len().to_string()));
            row.extend(p.ks.iter().map(|&x| cell(x)));
            row.extend(p.max_scaled.iter().map(|&x| cell(x)));
            row.extend(p.endpoint.iter().map(|&x| cell(x)));
            if let Some(t) = &trend {
                for per_class in t {
                    row.push(match k {
                        0 => "-".to_string(),
                        _ if per_class[k - 1] => "nonincreasing".to_string(),
                        _ => "increased".to_string(),
                    });
                }
            }
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let summary_csv = spec.out_dir.join("summary.csv");
    write_csv(&summary_csv, &header_refs, rows)?;

    let summary_txt = spec.out_dir.join("summary.txt");
    write_text(&summary_txt, &summary_text(spec, &points, trend.as_ref()))?;

    Ok(StudyOutcome {
        kind: spec.kind,
        points,
        trend,
        summary_csv,
        summary_txt,
    })
}

fn summary_text(spec: &StudySpec, points: &[SweepPoint], trend: Option<&[Vec<bool>; 3]>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} study, root seed {}, {} service starts per point",
        spec.kind, spec.seed, spec.served
    );
    if spec.kind == StudyKind::DoubleLimit {
        let _ = writeln!(
            s,
            "EXPERIMENTAL: convergence to the double limit is slow; E S^tot = {} at every point",
            spec.double_limit_switchover
        );
    }
    let scaling = match spec.kind {
        StudyKind::HeavyTraffic => "(1 - rho) W",
        StudyKind::LargeSwitchover => "W / r",
        StudyKind::DoubleLimit => "(1 - rho) W / r",
    };
    let _ = writeln!(
        s,
        "scaled delay: {scaling}; grid of {GRID_POINTS} points up to the {} quantile",
        GRID_QUANTILE
    );
    let _ = writeln!(
        s,
        "shape: arrival ratios, service laws, routing and switch-over laws as in the base configuration below"
    );
    let _ = writeln!(
        s,
        "\n{:>10} {:>10} {:>10} {:>10}",
        spec.kind.sweep_label(),
        "KS H",
        "KS L",
        "KS 2"
    );
    for p in points {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:>10} {:>10} {:>10} {:>10}",
            p.value,
            f(p.ks[0]),
            f(p.ks[1]),
            f(p.ks[2])
        );
    }
    if let Some(t) = trend {
        for c in Class::ALL {
            let ok = t[c.index()].iter().all(|&b| b);
            let _ = writeln!(
                s,
                "KS trend for class {c}: {}",
                if ok {
                    "nonincreasing toward the limit"
                } else {
                    "not monotone"
                }
            );
        }
    }
    let _ = writeln!(s, "\nbase configuration:");
    for line in spec.base.to_json_string().lines() {
        let _ = writeln!(s, "  {line}");
    }
    s
}
