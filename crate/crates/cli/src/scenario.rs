//! Single-configuration reports: derived quantities, analytic means,
//! simulation estimates and their comparison.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use markov_polling::sim::Estimate;
use markov_polling::{
    derive_model, lst_moment, run_simulation, summarize, validate, Class, DerivedModel, Queue, SampleSet, SimOptions,
    Summary, SystemConfig, Transform, TransformEngine, TransformError,
};

use crate::error::CliError;
use crate::output::{create_dir, write_csv, write_text};

/// Reads and parses a configuration file. Invalid values are not rejected
/// here; see [`check_config`].
pub fn load_config(path: &Path) -> Result<SystemConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(SystemConfig::from_json_str(&text)?)
}

/// Validation report as an error when there are findings.
pub fn check_config(config: &SystemConfig) -> Result<DerivedModel, CliError> {
    let report = validate(config);
    if !report.is_valid() {
        return Err(CliError::Validation(format!("invalid configuration:\n{report}")));
    }
    Ok(derive_model(config)?)
}

/// What a report row measures, so scaled and unscaled numbers never share
/// a column without a tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    Time,
    Customers,
}

impl Unit {
    pub fn label(self) -> &'static str {
        match self {
            Unit::Time => "time",
            Unit::Customers => "customers",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub unit: Unit,
    /// `None` when the formula degenerates for this configuration.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticMeans {
    pub cycle: [Option<f64>; 2],
    pub intervisit: [Option<f64>; 2],
    pub wait: [Option<f64>; 3],
    /// Mean number in system per class, waiting or in service.
    pub in_system: [Option<f64>; 3],
    pub notes: Vec<String>,
}

impl AnalyticMeans {
    pub fn quantities(&self) -> Vec<Quantity> {
        let mut out = Vec::new();
        for q in Queue::ALL {
            out.push(Quantity {
                name: format!("cycle_{q}"),
                unit: Unit::Time,
                value: self.cycle[q.index()],
            });
        }
        for q in Queue::ALL {
            out.push(Quantity {
                name: format!("intervisit_{q}"),
                unit: Unit::Time,
                value: self.intervisit[q.index()],
            });
        }
        for c in Class::ALL {
            out.push(Quantity {
                name: format!("wait_{c}"),
                unit: Unit::Time,
                value: self.wait[c.index()],
            });
        }
        for c in Class::ALL {
            out.push(Quantity {
                name: format!("in_system_{c}"),
                unit: Unit::Customers,
                value: self.in_system[c.index()],
            });
        }
        out
    }
}

/// Mean cycle and intervisit times in closed form, mean waiting times from
/// the transforms and mean numbers in system by Little's law.
pub fn analytic_means(config: &SystemConfig) -> Result<AnalyticMeans, CliError> {
    let model = check_config(config)?;
    let mut notes = Vec::new();
    let mut means = AnalyticMeans {
        cycle: [None; 2],
        intervisit: [None; 2],
        wait: [None; 3],
        in_system: [None; 3],
        notes: Vec::new(),
    };
    if model.sigma > 0.0 {
        for q in Queue::ALL {
            means.cycle[q.index()] = Some(model.mean_cycle(q));
            means.intervisit[q.index()] = Some(model.mean_intervisit(q));
        }
    } else {
        notes.push(
            "degenerate: no switch-over time (sigma = 0), so the cycle-time formulas give E C_i = 0 and the \
             waiting-time transforms are undefined"
                .to_string(),
        );
    }
    match TransformEngine::new(config) {
        Ok(engine) => {
            for class in Class::ALL {
                match lst_moment(&engine.handle(Transform::Waiting(class)), 1) {
                    Ok(w) => {
                        means.wait[class.index()] = Some(w);
                        let l = config.arrival_rate(class) * (w + config.service(class).mean());
                        means.in_system[class.index()] = Some(l);
                    }
                    Err(TransformError::Degenerate(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Err(TransformError::Degenerate(why)) => notes.push(format!("degenerate: {why}")),
        Err(e) => return Err(e.into()),
    }
    means.notes = notes;
    Ok(means)
}

pub fn derived_rows(model: &DerivedModel) -> Vec<(String, f64)> {
    let mut rows = vec![("pi_1".to_string(), model.pi_1), ("pi_2".to_string(), model.pi_2)];
    for i in 0..2 {
        for j in 0..2 {
            rows.push((format!("r_{}{}", i + 1, j + 1), model.r[i][j]));
        }
    }
    rows.extend([
        ("sigma".to_string(), model.sigma),
        ("lambda_1".to_string(), model.lambda_1),
        ("rho_H".to_string(), model.rho_h),
        ("rho_L".to_string(), model.rho_l),
        ("rho_1".to_string(), model.rho_1),
        ("rho_2".to_string(), model.rho_2),
        ("rho".to_string(), model.rho),
        ("rho_Lp".to_string(), model.rho_lp),
        ("rho_Hp".to_string(), model.rho_hp),
        ("es_tot".to_string(), model.es_tot),
        ("r_1".to_string(), model.r_1),
        ("r_2".to_string(), model.r_2),
    ]);
    rows
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "degenerate".to_string())
}

fn write_derived(dir: &Path, model: &DerivedModel) -> Result<(), CliError> {
    let rows = derived_rows(model)
        .into_iter()
        .map(|(k, v)| vec![k, v.to_string()])
        .collect();
    write_csv(&dir.join("derived.csv"), &["quantity", "value"], rows)
}

fn write_analytic(dir: &Path, means: &AnalyticMeans) -> Result<(), CliError> {
    let rows = means
        .quantities()
        .into_iter()
        .map(|q| vec![q.name, q.unit.label().to_string(), fmt_opt(q.value)])
        .collect();
    write_csv(&dir.join("analytic.csv"), &["quantity", "unit", "analytic_mean"], rows)
}

fn config_header(config: &SystemConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "configuration:");
    for line in config.to_json_string().lines() {
        let _ = writeln!(s, "  {line}");
    }
    s
}

fn analysis_text(config: &SystemConfig, model: &DerivedModel, means: &AnalyticMeans) -> String {
    let mut text = config_header(config);
    let _ = writeln!(text, "\nderived model:");
    for (k, v) in derived_rows(model) {
        let _ = writeln!(text, "  {k:<10} {v}");
    }
    let _ = writeln!(text, "\nanalytic means:");
    for q in means.quantities() {
        let _ = writeln!(text, "  {:<14} {:>22} [{}]", q.name, fmt_opt(q.value), q.unit.label());
    }
    for note in &means.notes {
        let _ = writeln!(text, "\nnote: {note}");
    }
    text
}

fn write_analysis(config: &SystemConfig, out_dir: &Path) -> Result<(DerivedModel, AnalyticMeans, String), CliError> {
    let model = check_config(config)?;
    let means = analytic_means(config)?;
    create_dir(out_dir)?;
    write_derived(out_dir, &model)?;
    write_analytic(out_dir, &means)?;
    let text = analysis_text(config, &model, &means);
    Ok((model, means, text))
}

/// Writes `derived.csv`, `analytic.csv` and `summary.txt` into `out_dir`.
pub fn analyze(config: &SystemConfig, out_dir: &Path) -> Result<AnalyticMeans, CliError> {
    let (_, means, text) = write_analysis(config, out_dir)?;
    write_text(&out_dir.join("summary.txt"), &text)?;
    Ok(means)
}

/// One row of the analytic-versus-simulation table.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub unit: Unit,
    pub analytic: Option<f64>,
    pub simulated: Option<f64>,
    /// Number of simulated observations behind `simulated`.
    pub samples: Option<usize>,
    pub interval: Option<(f64, f64)>,
}

impl Comparison {
    pub fn relative_error(&self) -> Option<f64> {
        match (self.analytic, self.simulated) {
            (Some(a), Some(s)) if a != 0.0 => Some((s - a) / a),
            _ => None,
        }
    }

    pub fn covered(&self) -> Option<bool> {
        match (self.analytic, self.interval) {
            (Some(a), Some((lo, hi))) => Some(lo <= a && a <= hi),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub model: DerivedModel,
    pub analytic: AnalyticMeans,
    pub samples: SampleSet,
    pub summary: Summary,
    pub comparisons: Vec<Comparison>,
    pub files: Vec<PathBuf>,
}

fn estimate_parts(e: Option<&Estimate>) -> (Option<f64>, Option<usize>, Option<(f64, f64)>) {
    (e.map(|e| e.mean), e.map(|e| e.n), e.and_then(|e| e.interval()))
}

pub fn compare(analytic: &AnalyticMeans, summary: &Summary) -> Vec<Comparison> {
    let mut rows = Vec::new();
    for q in Queue::ALL {
        let (simulated, samples, interval) = estimate_parts(summary.cycle(q));
        rows.push(Comparison {
            name: format!("cycle_{q}"),
            unit: Unit::Time,
            analytic: analytic.cycle[q.index()],
            simulated,
            samples,
            interval,
        });
    }
    for c in Class::ALL {
        let (simulated, samples, interval) = estimate_parts(summary.wait(c));
        rows.push(Comparison {
            name: format!("wait_{c}"),
            unit: Unit::Time,
            analytic: analytic.wait[c.index()],
            simulated,
            samples,
            interval,
        });
    }
    for c in Class::ALL {
        rows.push(Comparison {
            name: format!("in_system_{c}"),
            unit: Unit::Customers,
            analytic: analytic.in_system[c.index()],
            simulated: Some(summary.mean_in_system[c.index()]),
            samples: None,
            interval: None,
        });
    }
    rows
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Analyses a configuration file, simulates it and writes the comparison
/// reports into `out_dir`.
pub fn run_scenario(
    config_path: &Path,
    out_dir: &Path,
    seed: u64,
    served: u64,
    warmup: f64,
) -> Result<ScenarioReport, CliError> {
    let config = load_config(config_path)?;
    simulate_config(&config, out_dir, seed, served, warmup)
}

pub fn simulate_config(
    config: &SystemConfig,
    out_dir: &Path,
    seed: u64,
    served: u64,
    warmup: f64,
) -> Result<ScenarioReport, CliError> {
    let (model, analytic, mut text) = write_analysis(config, out_dir)?;
    let samples = run_simulation(config, &SimOptions::new(served, warmup, seed))?;
    let summary = summarize(&samples);
    let comparisons = compare(&analytic, &summary);

    let sim_rows = comparisons
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.unit.label().to_string(),
                c.samples.map(|n| n.to_string()).unwrap_or_default(),
                cell(c.simulated),
                cell(c.interval.map(|i| i.0)),
                cell(c.interval.map(|i| i.1)),
            ]
        })
        .collect();
    let sim_path = out_dir.join("simulation.csv");
    write_csv(
        &sim_path,
        &["quantity", "unit", "samples", "simulated_mean", "ci95_low", "ci95_high"],
        sim_rows,
    )?;

    let cmp_rows = comparisons
        .iter()
        .map(|c| {
            vec![
                c.name.clone(),
                c.unit.label().to_string(),
                c.analytic.map(|x| x.to_string()).unwrap_or_else(|| "degenerate".into()),
                cell(c.simulated),
                cell(c.relative_error()),
                cell(c.interval.map(|i| i.0)),
                cell(c.interval.map(|i| i.1)),
                c.covered().map(|b| b.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let cmp_path = out_dir.join("comparison.csv");
    write_csv(
        &cmp_path,
        &[
            "quantity",
            "unit",
            "analytic_mean",
            "simulated_mean",
            "relative_error",
            "ci95_low",
            "ci95_high",
            "ci_covers_analytic",
        ],
        cmp_rows,
    )?;

    let samples_path = out_dir.join("samples.csv");
    let longest = Class::ALL.iter().map(|&c| samples.waits(c).len()).max().unwrap_or(0);
    let rows = (0..longest)
        .map(|i| {
            Class::ALL
                .iter()
                .map(|&c| samples.waits(c).get(i).map(|w| w.to_string()).unwrap_or_default())
                .collect()
        })
        .collect();
    write_csv(&samples_path, &["wait_H", "wait_L", "wait_2"], rows)?;

    let _ = writeln!(
        text,
        "\nsimulation: seed {seed}, {} service starts, {} discarded as warm-up, observed time {}",
        samples.served, samples.warmup_discarded, samples.observed_time
    );
    let _ = writeln!(
        text,
        "  {:<14} {:>14} {:>14} {:>12} {:>30} covered",
        "quantity", "analytic", "simulated", "rel.error", "95% CI"
    );
    for c in &comparisons {
        let ci = c
            .interval
            .map(|(lo, hi)| format!("[{lo:.6}, {hi:.6}]"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            text,
            "  {:<14} {:>14} {:>14} {:>12} {:>30} {}",
            format!("{} ({})", c.name, c.unit.label()),
            c.analytic
                .map(|x| format!("{x:.6}"))
                .unwrap_or_else(|| "degenerate".into()),
            c.simulated.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into()),
            c.relative_error()
                .map(|x| format!("{x:+.4}"))
                .unwrap_or_else(|| "-".into()),
            ci,
            c.covered().map(|b| if b { "yes" } else { "no" }).unwrap_or("-"),
        );
    }
    write_text(&out_dir.join("summary.txt"), &text)?;

    let files = [
        "derived.csv",
        "analytic.csv",
        "simulation.csv",
        "comparison.csv",
        "samples.csv",
        "summary.txt",
    ]
    .iter()
    .map(|f| out_dir.join(f))
    .collect();
    Ok(ScenarioReport {
        model,
        analytic,
        samples,
        summary,
        comparisons,
        files,
    })
}
