//! Acceptance checks, one line per criterion. Every criterion runs even if an
//! earlier one fails; the process exits nonzero when any of them failed.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use markov_polling::{
    empirical_cdf, gamma_mixture_cdf, heavy_traffic_params, limit_cdf, lst_moment, run_simulation, summarize,
    table1_config, table2_config, BusyPeriod, Class, Queue, Regime, ServiceDistribution, SimOptions, SystemConfig,
    Transform, TransformEngine,
};
use polling_experiments::{study, StudyKind, StudyOutcome, StudySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

type Check = Result<(bool, String), String>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn distribution(kind: u32, mean: f64) -> ServiceDistribution {
    match kind % 3 {
        0 => ServiceDistribution::exponential_with_mean(mean),
        1 => ServiceDistribution::deterministic(mean),
        _ => ServiceDistribution::erlang_with_mean(2 + kind % 3, mean),
    }
}

/// Stable configurations with mixed service and switch-over laws.
fn random_configs(n: usize, seed: u64) -> Vec<SystemConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let d =
                |lo: f64, hi: f64, rng: &mut ChaCha8Rng| distribution(rng.random_range(0..6), rng.random_range(lo..hi));
            let base = SystemConfig {
                lambda_h: rng.random_range(0.1..1.0),
                lambda_l: rng.random_range(0.1..1.0),
                lambda_2: rng.random_range(0.1..1.0),
                b_h: d(0.2, 2.0, &mut rng),
                b_l: d(0.2, 2.0, &mut rng),
                b_2: d(0.2, 2.0, &mut rng),
                p_1: rng.random_range(0.0..0.85),
                p_2: rng.random_range(0.0..0.85),
                s_11: d(0.1, 4.0, &mut rng),
                s_12: d(0.1, 4.0, &mut rng),
                s_21: d(0.1, 4.0, &mut rng),
                s_22: d(0.1, 4.0, &mut rng),
            };
            base.with_total_load(rng.random_range(0.05..0.9))
        })
        .collect()
}

fn z_grid() -> impl Iterator<Item = f64> {
    (1..=19).map(|k| 0.05 * k as f64)
}

fn identity_normalization() -> Check {
    let mut configs = vec![table1_config(0.5), table1_config(0.95), table2_config(50.0)];
    configs.extend(random_configs(10, 7));
    let mut worst = 0.0f64;
    let mut at = String::new();
    for c in &configs {
        let e = TransformEngine::new(c).map_err(err)?;
        for t in Transform::all() {
            let h = e.handle(t);
            let gap = (h.eval(h.identity_point()).map_err(err)? - 1.0).abs();
            if gap > worst {
                worst = gap;
                at = format!("{t:?}");
            }
        }
    }
    let n = Transform::all().len();
    Ok((
        worst <= 1e-10,
        format!(
            "{n} transforms on {} configs, worst |T(id) - 1| = {worst:.2e} ({at})",
            configs.len()
        ),
    ))
}

fn busy_period_oracle() -> Check {
    let mut c = table2_config(1.0);
    c.lambda_h = 0.5;
    c.b_h = ServiceDistribution::exponential_with_mean(0.85);
    c.lambda_l = 1e-9;
    c.lambda_2 = 1e-9;
    let e = TransformEngine::new(&c).map_err(err)?;
    let mean = lst_moment(&e.handle(Transform::BusyPeriod(BusyPeriod::H)), 1).map_err(err)?;
    let exact = 0.85 / (1.0 - 0.5 * 0.85);
    let mean_gap = rel(mean, exact);
    let mut residual = 0.0f64;
    for s in [0.0, 0.1, 1.0, 10.0] {
        residual = residual.max(e.kendall_residual(BusyPeriod::H, s).map_err(err)?);
    }
    Ok((
        mean_gap <= 1e-8 && residual <= 1e-13,
        format!("E theta relative error {mean_gap:.2e}, max Kendall residual {residual:.2e}"),
    ))
}

fn dual_formulas() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut g_gap = 0.0f64;
    let mut k_gap = 0.0f64;
    for c in random_configs(10, 19) {
        let e = TransformEngine::new(&c).map_err(err)?;
        for z in z_grid() {
            g_gap = g_gap.max((e.g1_direct(z).map_err(err)? - e.dsa_g1(z).map_err(err)?).abs());
        }
        let r = rng.random_range(0.5..60.0);
        let e = TransformEngine::new(&c.with_deterministic_total_switchover(r)).map_err(err)?;
        for z in z_grid() {
            k_gap = k_gap.max((e.dsa_k(z).map_err(err)? - e.dsa_k_composed(z).map_err(err)?).abs());
            let det = e.dsa_k_deterministic(z).map_err(err)? - e.dsa_k_deterministic_composed(z).map_err(err)?;
            k_gap = k_gap.max(det.abs());
        }
    }
    Ok((
        g_gap <= 1e-8 && k_gap <= 1e-8,
        format!("10 configs, 19 points: max G1 gap {g_gap:.2e}, max K gap {k_gap:.2e}"),
    ))
}

fn closed_form_means() -> Check {
    let mut worst = 0.0f64;
    for c in [table1_config(0.5), table1_config(0.9), table2_config(10.0)] {
        let e = TransformEngine::new(&c).map_err(err)?;
        let m = e.model();
        for q in Queue::ALL {
            let ec = lst_moment(&e.handle(Transform::Cycle(q)), 1).map_err(err)?;
            let ei = lst_moment(&e.handle(Transform::Intervisit(q)), 1).map_err(err)?;
            let closed = m.sigma / (m.pi(q) * (1.0 - m.rho));
            worst = worst.max(rel(ec, closed));
            worst = worst.max(rel(ei, (1.0 - m.queue_load(q)) * closed));
        }
    }
    let mut h1_worst = 0.0f64;
    for r in [1.0, 50.0] {
        let e = TransformEngine::new(&table2_config(r)).map_err(err)?;
        let m = e.model();
        let closed = m.lambda_1 * (1.0 - m.rho_1) * r / (1.0 - m.rho);
        for t in [Transform::H1, Transform::H1Deterministic] {
            h1_worst = h1_worst.max(rel(lst_moment(&e.handle(t), 1).map_err(err)?, closed));
        }
    }
    Ok((
        worst <= 1e-6 && h1_worst <= 1e-3,
        format!("cycle/intervisit relative error {worst:.2e}, E H1 relative error {h1_worst:.2e}"),
    ))
}

fn pre_limit_simulation() -> Check {
    let config = table1_config(0.5);
    let engine = TransformEngine::new(&config).map_err(err)?;
    let samples = run_simulation(&config, &SimOptions::new(1_000_000, 0.1, 5)).map_err(err)?;
    let summary = summarize(&samples);
    let m = engine.model();
    let mut ok = true;
    let mut cycle_gap = 0.0f64;
    for q in Queue::ALL {
        let est = summary.cycle(q).ok_or("no cycles recorded")?;
        ok &= est.n >= 100_000;
        cycle_gap = cycle_gap.max(rel(est.mean, m.mean_cycle(q)));
    }
    let mut outside = Vec::new();
    let mut little_gap = 0.0f64;
    for class in Class::ALL {
        let analytic = lst_moment(&engine.handle(Transform::Waiting(class)), 1).map_err(err)?;
        let covered = summary.wait(class).and_then(|e| e.covers(analytic)).unwrap_or(false);
        if !covered {
            outside.push(class.label());
        }
        let little = config.arrival_rate(class) * (analytic + config.service(class).mean());
        little_gap = little_gap.max(rel(summary.mean_in_system[class.index()], little));
    }
    ok &= cycle_gap <= 0.01 && outside.is_empty() && little_gap <= 0.02;
    Ok((
        ok,
        format!(
            "{} served, cycle gap {:.2}%, waits outside CI: {:?}, Little gap {:.2}%",
            samples.served,
            100.0 * cycle_gap,
            outside,
            100.0 * little_gap
        ),
    ))
}

fn single_point(
    kind: StudyKind,
    base: SystemConfig,
    value: f64,
    served: u64,
    seed: u64,
    out: &Path,
) -> Result<StudyOutcome, String> {
    let mut spec = StudySpec::new(kind, base, out.to_path_buf());
    spec.sweep = vec![value];
    spec.served = served;
    spec.seed = seed;
    study(&spec).map_err(err)
}

struct HeavyTrafficFit {
    ks_l: f64,
    ks_2: f64,
    atom_mass: f64,
    atom: f64,
    ks_h_positive: f64,
}

/// Splits the H samples at a small threshold: the mass below it estimates
/// the atom, the rest is compared with the conditioned gamma mixture.
fn heavy_traffic_fit(outcome: &StudyOutcome) -> Result<HeavyTrafficFit, String> {
    let p = &outcome.points[0];
    let params = &p.params;
    let h = &p.scaled[Class::H.index()];
    let threshold = 0.01 * params.heavy_traffic_mean(Class::H);
    let positive: Vec<f64> = h.iter().copied().filter(|&x| x > threshold).collect();
    let atom_mass = 1.0 - positive.len() as f64 / h.len() as f64;
    let (alpha, omega) = (params.alpha, params.omega(Class::H));
    let base = gamma_mixture_cdf(alpha, omega, threshold).map_err(err)?;
    let reference = |t: f64| {
        if t <= threshold {
            0.0
        } else {
            (gamma_mixture_cdf(alpha, omega, t).unwrap_or(1.0) - base) / (1.0 - base)
        }
    };
    let ks_h_positive = empirical_cdf(&positive).map_err(err)?.ks_distance(reference);
    Ok(HeavyTrafficFit {
        ks_l: p.ks[Class::L.index()].ok_or("no L samples")?,
        ks_2: p.ks[Class::Two.index()].ok_or("no class-2 samples")?,
        atom_mass,
        atom: params.atom(Regime::HeavyTraffic, Class::H),
        ks_h_positive,
    })
}

fn heavy_traffic_limit() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let base = table1_config(0.5);
    let moderate = single_point(
        StudyKind::HeavyTraffic,
        base.clone(),
        0.8,
        4_000_000,
        41,
        &dir.path().join("rho80"),
    )?;
    let moderate = heavy_traffic_fit(&moderate)?;
    let heavy = single_point(
        StudyKind::HeavyTraffic,
        base,
        0.99,
        40_000_000,
        42,
        &dir.path().join("rho99"),
    )?;
    let heavy = heavy_traffic_fit(&heavy)?;
    let ok = heavy.ks_l <= 0.05
        && heavy.ks_2 <= 0.05
        && (heavy.atom_mass - heavy.atom).abs() <= 0.03
        && heavy.ks_h_positive <= 0.06
        && heavy.ks_l < moderate.ks_l
        && heavy.ks_2 < moderate.ks_2
        && heavy.ks_h_positive < moderate.ks_h_positive;
    Ok((
        ok,
        format!(
            "rho 0.99: KS L {:.4}, KS 2 {:.4}, H mass near 0 {:.4} vs {:.4}, KS H+ {:.4}; rho 0.8: KS L {:.4}, KS 2 {:.4}, KS H+ {:.4}",
            heavy.ks_l,
            heavy.ks_2,
            heavy.atom_mass,
            heavy.atom,
            heavy.ks_h_positive,
            moderate.ks_l,
            moderate.ks_2,
            moderate.ks_h_positive
        ),
    ))
}

fn large_switchover_limit() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut spec = StudySpec::new(
        StudyKind::LargeSwitchover,
        table2_config(100.0),
        dir.path().to_path_buf(),
    );
    spec.sweep = vec![10.0, 100.0, 500.0];
    spec.seed = 7;
    let outcome = study(&spec).map_err(err)?;
    let last = outcome.point(500.0).ok_or("missing r = 500")?;
    let mut ok = last.served >= 5000;
    let mut parts = Vec::new();
    for class in [Class::L, Class::Two] {
        let i = class.index();
        let max = last.max_scaled[i].ok_or("no samples")?;
        let u = last.endpoint[i].ok_or("no endpoint")?;
        let ks: Vec<f64> = outcome.points.iter().map(|p| p.ks[i].unwrap_or(f64::NAN)).collect();
        let monotone = ks.windows(2).all(|w| w[1] <= w[0]);
        ok &= rel(max, u) <= 0.05 && ks[2] <= 0.10 && monotone;
        parts.push(format!(
            "{}: max {max:.3} vs u {u:.3}, KS over r = 10/100/500 {:.3}/{:.3}/{:.3}",
            class.label(),
            ks[0],
            ks[1],
            ks[2]
        ));
    }
    Ok((ok, format!("{} served per point; {}", last.served, parts.join("; "))))
}

fn gamma_mixture_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for (alpha, omega) in [(1.94, 0.78), (0.5, 1.0), (5.0, 2.0)] {
        let gamma = Gamma::new(alpha + 1.0, 1.0 / omega).map_err(err)?;
        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| rng.random::<f64>() * gamma.sample(&mut rng))
            .collect();
        let ecdf = empirical_cdf(&draws).map_err(err)?;
        let top = 2.0 * (alpha + 1.0) / omega;
        for k in 1..=50 {
            let t = top * k as f64 / 50.0;
            worst = worst.max((gamma_mixture_cdf(alpha, omega, t).map_err(err)? - ecdf.eval(t)).abs());
        }
    }
    Ok((
        worst <= 3e-3,
        format!("max gap over 3 parameter pairs and 50 points {worst:.2e}"),
    ))
}

fn double_limit_consistency() -> Check {
    let r = 1e4;
    let params = heavy_traffic_params(&table1_config(0.5))
        .map_err(err)?
        .with_total_switchover(r);
    let mut worst = 0.0f64;
    for class in Class::ALL {
        let u = params
            .uniform_endpoint(Regime::DoubleLimit, class)
            .ok_or("no endpoint")?;
        for k in 0..=400 {
            let t = 1.5 * u * k as f64 / 400.0;
            let ht = limit_cdf(Regime::HeavyTraffic, class, t * r, &params).map_err(err)?;
            let dl = limit_cdf(Regime::DoubleLimit, class, t, &params).map_err(err)?;
            worst = worst.max((ht - dl).abs());
        }
    }
    Ok((worst <= 1e-2, format!("r = 1e4, max CDF gap over classes {worst:.2e}")))
}

fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(err)? {
        let path = entry.map_err(err)?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            files.push((name, fs::read(&path).map_err(err)?));
        }
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Check {
    let mut compared = 0;
    for (kind, base, sweep) in [
        (StudyKind::HeavyTraffic, table1_config(0.5), vec![0.8, 0.9]),
        (StudyKind::LargeSwitchover, table2_config(100.0), vec![10.0, 50.0]),
    ] {
        let mut runs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(err)?;
            let mut spec = StudySpec::new(kind, base.clone(), dir.path().to_path_buf());
            spec.sweep = sweep.clone();
            spec.served = 20_000;
            spec.seed = 99;
            study(&spec).map_err(err)?;
            runs.push(csv_files(dir.path())?);
        }
        if runs[0] != runs[1] {
            return Ok((false, format!("{kind} study differs between runs")));
        }
        compared += runs[0].len();
    }
    Ok((true, format!("{compared} CSV files byte-identical across two runs")))
}

fn main() -> ExitCode {
    // name, check, runtime budget in seconds
    let criteria: [(&str, fn() -> Check, Option<f64>); 10] = [
        ("transform sanity", identity_normalization, Some(10.0)),
        ("busy-period oracle", busy_period_oracle, None),
        ("dual formulas", dual_formulas, None),
        ("closed-form means", closed_form_means, None),
        ("simulation vs analytics", pre_limit_simulation, Some(120.0)),
        ("heavy-traffic limit", heavy_traffic_limit, Some(600.0)),
        ("large switch-over limit", large_switchover_limit, None),
        ("gamma mixture vs Monte Carlo", gamma_mixture_oracle, None),
        (
            "heavy-traffic to double-limit consistency",
            double_limit_consistency,
            None,
        ),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (mut pass, mut detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        if let Some(limit) = budget {
            if secs > *limit {
                pass = false;
                detail.push_str(&format!("; over the {limit} s budget"));
            }
        }
        if !pass {
            failed += 1;
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name} ({secs:.1} s): {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
