//! Scenario definition and the first-order quantities derived from it.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distribution::ServiceDistribution;
use crate::error::ModelError;

/// Customer class. `H` and `L` share the first queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    H,
    L,
    Two,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::H, Class::L, Class::Two];

    pub fn index(self) -> usize {
        match self {
            Class::H => 0,
            Class::L => 1,
            Class::Two => 2,
        }
    }

    pub fn queue(self) -> Queue {
        match self {
            Class::H | Class::L => Queue::Q1,
            Class::Two => Queue::Q2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Class::H => "H",
            Class::L => "L",
            Class::Two => "2",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Queue {
    Q1,
    Q2,
}

impl Queue {
    pub const ALL: [Queue; 2] = [Queue::Q1, Queue::Q2];

    pub fn index(self) -> usize {
        match self {
            Queue::Q1 => 0,
            Queue::Q2 => 1,
        }
    }

    pub fn other(self) -> Queue {
        match self {
            Queue::Q1 => Queue::Q2,
            Queue::Q2 => Queue::Q1,
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }
}

impl fmt::Display for Queue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.number())
    }
}

/// Stationary visit fractions and reversed transition probabilities of the
/// routing chain. `r[i][j]` is the probability that the poll preceding a
/// poll of queue `j` was at queue `i` (zero-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Routing {
    pub pi: [f64; 2],
    pub r: [[f64; 2]; 2],
}

pub fn derive_routing(p1: f64, p2: f64) -> Result<Routing, ModelError> {
    for (index, value) in [(1, p1), (2, p2)] {
        if !(0.0..1.0).contains(&value) {
            return Err(ModelError::RepeatProbability { index, value });
        }
    }
    let denom = 2.0 - p1 - p2;
    Ok(Routing {
        pi: [(1.0 - p2) / denom, (1.0 - p1) / denom],
        r: [[p1, 1.0 - p2], [1.0 - p1, p2]],
    })
}

/// A complete scenario: arrival rates, service and switch-over
/// distributions and the repeat probabilities of the routing chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub lambda_h: f64,
    pub lambda_l: f64,
    pub lambda_2: f64,
    pub b_h: ServiceDistribution,
    pub b_l: ServiceDistribution,
    pub b_2: ServiceDistribution,
    pub p_1: f64,
    pub p_2: f64,
    pub s_11: ServiceDistribution,
    pub s_12: ServiceDistribution,
    pub s_21: ServiceDistribution,
    pub s_22: ServiceDistribution,
}

impl SystemConfig {
    pub fn arrival_rate(&self, class: Class) -> f64 {
        match class {
            Class::H => self.lambda_h,
            Class::L => self.lambda_l,
            Class::Two => self.lambda_2,
        }
    }

    pub fn service(&self, class: Class) -> &ServiceDistribution {
        match class {
            Class::H => &self.b_h,
            Class::L => &self.b_l,
            Class::Two => &self.b_2,
        }
    }

    pub fn switchover(&self, from: Queue, to: Queue) -> &ServiceDistribution {
        match (from, to) {
            (Queue::Q1, Queue::Q1) => &self.s_11,
            (Queue::Q1, Queue::Q2) => &self.s_12,
            (Queue::Q2, Queue::Q1) => &self.s_21,
            (Queue::Q2, Queue::Q2) => &self.s_22,
        }
    }

    pub fn repeat_probability(&self, queue: Queue) -> f64 {
        match queue {
            Queue::Q1 => self.p_1,
            Queue::Q2 => self.p_2,
        }
    }

    pub fn total_load(&self) -> f64 {
        Class::ALL
            .iter()
            .map(|&c| self.arrival_rate(c) * self.service(c).mean())
            .sum()
    }

    /// Same scenario with every arrival rate multiplied by `factor`; the
    /// ratios between the three classes are preserved.
    pub fn with_scaled_arrivals(&self, factor: f64) -> SystemConfig {
        let mut c = self.clone();
        c.lambda_h *= factor;
        c.lambda_l *= factor;
        c.lambda_2 *= factor;
        c
    }

    /// Rescales the arrival rates (fixed ratios) so that the total load is `rho`.
    pub fn with_total_load(&self, rho: f64) -> SystemConfig {
        let current = self.total_load();
        assert!(current > 0.0, "cannot rescale a configuration without load");
        self.with_scaled_arrivals(rho / current)
    }

    /// Replaces all four switch-over distributions.
    pub fn with_switchovers(&self, s: ServiceDistribution) -> SystemConfig {
        let mut c = self.clone();
        c.s_11 = s;
        c.s_12 = s;
        c.s_21 = s;
        c.s_22 = s;
        c
    }

    /// All four switch-overs deterministic and equal, chosen so that the
    /// mean total switch-over time `E S^tot` equals `r`.
    pub fn with_deterministic_total_switchover(&self, r: f64) -> SystemConfig {
        let d = r * (1.0 - self.p_1) * (1.0 - self.p_2) / (2.0 - self.p_1 - self.p_2);
        self.with_switchovers(ServiceDistribution::deterministic(d))
    }

    pub fn from_json_str(text: &str) -> Result<SystemConfig, ModelError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        Ok(file.into())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<SystemConfig, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ConfigFile::from(self)).expect("config serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    lambda: PerClass<f64>,
    service: PerClass<ServiceDistribution>,
    routing: RoutingFile,
    switchover: SwitchoverFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerClass<T> {
    #[serde(rename = "H")]
    h: T,
    #[serde(rename = "L")]
    l: T,
    #[serde(rename = "2")]
    two: T,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoutingFile {
    p1: f64,
    p2: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwitchoverFile {
    s11: ServiceDistribution,
    s12: ServiceDistribution,
    s21: ServiceDistribution,
    s22: ServiceDistribution,
}

impl From<ConfigFile> for SystemConfig {
    fn from(f: ConfigFile) -> Self {
        SystemConfig {
            lambda_h: f.lambda.h,
            lambda_l: f.lambda.l,
            lambda_2: f.lambda.two,
            b_h: f.service.h,
            b_l: f.service.l,
            b_2: f.service.two,
            p_1: f.routing.p1,
            p_2: f.routing.p2,
            s_11: f.switchover.s11,
            s_12: f.switchover.s12,
            s_21: f.switchover.s21,
            s_22: f.switchover.s22,
        }
    }
}

impl From<&SystemConfig> for ConfigFile {
    fn from(c: &SystemConfig) -> Self {
        ConfigFile {
            lambda: PerClass {
                h: c.lambda_h,
                l: c.lambda_l,
                two: c.lambda_2,
            },
            service: PerClass {
                h: c.b_h,
                l: c.b_l,
                two: c.b_2,
            },
            routing: RoutingFile { p1: c.p_1, p2: c.p_2 },
            switchover: SwitchoverFile {
                s11: c.s_11,
                s12: c.s_12,
                s21: c.s_21,
                s22: c.s_22,
            },
        }
    }
}

/// Quantities derived once from a [`SystemConfig`].
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedModel {
    pub pi_1: f64,
    pub pi_2: f64,
    /// Reversed transition matrix, `r[i][j]` for queues `i+1`, `j+1`.
    pub r: [[f64; 2]; 2],
    /// Mean duration of an arbitrary switch-over.
    pub sigma: f64,
    pub lambda_1: f64,
    pub rho_h: f64,
    pub rho_l: f64,
    pub rho_1: f64,
    pub rho_2: f64,
    pub rho: f64,
    /// Load of the low-priority class measured in completion times.
    pub rho_lp: f64,
    /// Load of high-priority work served outside low-priority completion times.
    pub rho_hp: f64,
    /// Mean total switch-over time `E S^tot`.
    pub es_tot: f64,
    /// Mean aggregated switch-over from leaving Q1 until the next Q1-bound switch.
    pub r_1: f64,
    /// Mean aggregated switch-over from leaving Q2 until the next Q2-bound switch.
    pub r_2: f64,
    pub stable: bool,
}

impl DerivedModel {
    pub fn pi(&self, q: Queue) -> f64 {
        match q {
            Queue::Q1 => self.pi_1,
            Queue::Q2 => self.pi_2,
        }
    }

    pub fn queue_load(&self, q: Queue) -> f64 {
        match q {
            Queue::Q1 => self.rho_1,
            Queue::Q2 => self.rho_2,
        }
    }

    /// Closed-form mean cycle time `sigma / (pi_i (1 - rho))`.
    pub fn mean_cycle(&self, q: Queue) -> f64 {
        self.sigma / (self.pi(q) * (1.0 - self.rho))
    }

    /// Closed-form mean intervisit time `(1 - rho_i) E C_i`.
    pub fn mean_intervisit(&self, q: Queue) -> f64 {
        (1.0 - self.queue_load(q)) * self.mean_cycle(q)
    }
}

/// Computes every [`DerivedModel`] field. An overloaded configuration is
/// still evaluated (sweep tooling needs the numbers) but `stable` is false.
pub fn derive_model(config: &SystemConfig) -> Result<DerivedModel, ModelError> {
    let routing = derive_routing(config.p_1, config.p_2)?;
    let [pi_1, pi_2] = routing.pi;
    let r = routing.r;
    let es = |i: Queue, j: Queue| config.switchover(i, j).mean();

    let mut sigma = 0.0;
    for i in Queue::ALL {
        for j in Queue::ALL {
            sigma += r[i.index()][j.index()] * routing.pi[j.index()] * es(i, j);
        }
    }

    let rho_h = config.lambda_h * config.b_h.mean();
    let rho_l = config.lambda_l * config.b_l.mean();
    let rho_2 = config.lambda_2 * config.b_2.mean();
    let rho_1 = rho_h + rho_l;
    let rho = rho_1 + rho_2;
    let rho_lp = rho_l / (1.0 - rho_h);
    let rho_hp = rho_1 - rho_lp;

    let (p1, p2) = (config.p_1, config.p_2);
    let es_tot = (2.0 - p1 - p2) / ((1.0 - p1) * (1.0 - p2)) * sigma;
    let r_1 = es(Queue::Q1, Queue::Q2) + p2 / (1.0 - p2) * es(Queue::Q2, Queue::Q2);
    let r_2 = p1 / (1.0 - p1) * es(Queue::Q1, Queue::Q1) + es(Queue::Q2, Queue::Q1);

    Ok(DerivedModel {
        pi_1,
        pi_2,
        r,
        sigma,
        lambda_1: config.lambda_h + config.lambda_l,
        rho_h,
        rho_l,
        rho_1,
        rho_2,
        rho,
        rho_lp,
        rho_hp,
        es_tot,
        r_1,
        r_2,
        stable: rho < 1.0,
    })
}

/// One violated constraint of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NegativeRate { class: Class, value: f64 },
    RepeatProbability { index: usize, value: f64 },
    Distribution { role: String, message: String },
    NonPositiveServiceMean { class: Class },
    Unstable { rho: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeRate { class, value } => {
                write!(
                    f,
                    "arrival rate of class {class} must be nonnegative and finite (got {value})"
                )
            }
            Violation::RepeatProbability { index, value } => {
                if *value >= 1.0 {
                    write!(f, "repeat probability must be < 1 (p{index} = {value})")
                } else {
                    write!(f, "repeat probability must be >= 0 (p{index} = {value})")
                }
            }
            Violation::Distribution { role, message } => write!(f, "{role}: {message}"),
            Violation::NonPositiveServiceMean { class } => {
                write!(f, "service time of class {class} must have a positive mean")
            }
            Violation::Unstable { rho } => {
                write!(f, "stability requires total load < 1 (rho = {rho})")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("configuration is valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {v}")?;
        }
        Ok(())
    }
}

pub fn validate(config: &SystemConfig) -> ValidationReport {
    let mut violations = Vec::new();
    for class in Class::ALL {
        let value = config.arrival_rate(class);
        if !(value.is_finite() && value >= 0.0) {
            violations.push(Violation::NegativeRate { class, value });
        }
    }
    for (index, value) in [(1, config.p_1), (2, config.p_2)] {
        if !(0.0..1.0).contains(&value) {
            violations.push(Violation::RepeatProbability { index, value });
        }
    }
    let mut distributions_ok = true;
    for class in Class::ALL {
        let d = config.service(class);
        if let Err(message) = d.check() {
            distributions_ok = false;
            violations.push(Violation::Distribution {
                role: format!("service time of class {class}"),
                message,
            });
        } else if d.mean() <= 0.0 {
            distributions_ok = false;
            violations.push(Violation::NonPositiveServiceMean { class });
        }
    }
    for i in Queue::ALL {
        for j in Queue::ALL {
            if let Err(message) = config.switchover(i, j).check() {
                distributions_ok = false;
                violations.push(Violation::Distribution {
                    role: format!("switch-over S{}{}", i.number(), j.number()),
                    message,
                });
            }
        }
    }
    if distributions_ok {
        let rho = config.total_load();
        if !(rho < 1.0) {
            violations.push(Violation::Unstable { rho });
        }
    }
    ValidationReport { violations }
}

/// Validates and fails on the first report with findings.
pub fn validated(config: &SystemConfig) -> Result<DerivedModel, ModelError> {
    let report = validate(config);
    if !report.is_valid() {
        return Err(ModelError::Invalid(report));
    }
    derive_model(config)
}

/// The heavy-traffic test scenario: exponential services of mean 0.85,
/// equal arrival split, `p_1 = 0.4`, `p_2 = 0.3`, all switch-overs
/// exponential with mean 2.4, scaled to total load `rho`.
pub fn table1_config(rho: f64) -> SystemConfig {
    let b = ServiceDistribution::exponential_with_mean(0.85);
    let lambda = rho / (3.0 * 0.85);
    SystemConfig {
        lambda_h: lambda,
        lambda_l: lambda,
        lambda_2: lambda,
        b_h: b,
        b_l: b,
        b_2: b,
        p_1: 0.4,
        p_2: 0.3,
        s_11: ServiceDistribution::exponential_with_mean(2.4),
        s_12: ServiceDistribution::exponential_with_mean(2.4),
        s_21: ServiceDistribution::exponential_with_mean(2.4),
        s_22: ServiceDistribution::exponential_with_mean(2.4),
    }
}

/// The large-switch-over scenario: the heavy-traffic shape at `rho = 0.8`
/// with four equal deterministic switch-overs making `E S^tot = r`.
pub fn table2_config(r: f64) -> SystemConfig {
    table1_config(0.8).with_deterministic_total_switchover(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_example() {
        let r = derive_routing(0.4, 0.3).unwrap();
        assert!((r.pi[0] - 0.538462).abs() < 1e-6);
        assert!((r.pi[1] - 0.461538).abs() < 1e-6);
        assert_eq!(r.r, [[0.4, 0.7], [0.6, 0.3]]);
    }

    #[test]
    fn routing_symmetric_and_alternating() {
        for p in [0.0, 0.35, 0.9] {
            let r = derive_routing(p, p).unwrap();
            assert!((r.pi[0] - 0.5).abs() < 1e-15 && (r.pi[1] - 0.5).abs() < 1e-15);
        }
        let r = derive_routing(0.0, 0.0).unwrap();
        assert_eq!(r.r, [[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn routing_rejects_out_of_range() {
        assert!(derive_routing(1.0, 0.3).is_err());
        assert!(derive_routing(0.2, -0.1).is_err());
    }

    /// The stationary law of the two-state chain, estimated by walking it.
    #[test]
    fn routing_matches_chain_walk() {
        use rand::{Rng, SeedableRng};
        let (p1, p2) = (0.4, 0.3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 2_000_000;
        let mut state = 0usize;
        let mut at_1 = 0u64;
        // transitions j -> i counted to estimate r_ij = P(prev = i | next = j)
        let mut pairs = [[0u64; 2]; 2];
        for _ in 0..n {
            let stay = if state == 0 { p1 } else { p2 };
            let next = if rng.random::<f64>() < stay { state } else { 1 - state };
            pairs[state][next] += 1;
            state = next;
            if state == 0 {
                at_1 += 1;
            }
        }
        let routing = derive_routing(p1, p2).unwrap();
        let pi1 = at_1 as f64 / n as f64;
        assert!((pi1 - routing.pi[0]).abs() < 3e-3);
        for j in 0..2 {
            let col = (pairs[0][j] + pairs[1][j]) as f64;
            for i in 0..2 {
                let est = pairs[i][j] as f64 / col;
                assert!((est - routing.r[i][j]).abs() < 3e-3, "r{i}{j}");
            }
        }
    }

    #[test]
    fn table1_derived_quantities() {
        let m = derive_model(&table1_config(0.5)).unwrap();
        assert!((m.sigma - 2.4).abs() < 1e-12);
        assert!((m.es_tot - 1.3 / 0.42 * 2.4).abs() < 1e-12);
        assert!((m.es_tot - 7.428571).abs() < 1e-6);
        assert!((m.r_1 + m.r_2 - m.es_tot).abs() < 1e-12);
        assert!(m.stable);

        let m = derive_model(&table1_config(0.8)).unwrap();
        assert!((m.rho_h - 0.266667).abs() < 1e-6);
        assert!((m.rho_l - 0.266667).abs() < 1e-6);
        assert!((m.rho_2 - 0.266667).abs() < 1e-6);
        assert!((m.rho_lp - 0.363636).abs() < 1e-6);
    }

    #[test]
    fn zero_switchovers() {
        let c = table1_config(0.5).with_switchovers(ServiceDistribution::deterministic(0.0));
        let m = derive_model(&c).unwrap();
        assert_eq!(m.sigma, 0.0);
        assert_eq!(m.es_tot, 0.0);
    }

    #[test]
    fn deterministic_total_switchover() {
        for r in [1.0, 10.0, 500.0] {
            let m = derive_model(&table2_config(r)).unwrap();
            assert!((m.es_tot - r).abs() < 1e-9 * r);
            assert!((m.rho - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_findings() {
        assert!(validate(&table1_config(0.5)).is_valid());

        let mut c = table1_config(0.5);
        c.p_1 = 1.0;
        let report = validate(&c);
        assert_eq!(report.violations.len(), 1);
        assert!(report.messages()[0].contains("repeat probability must be < 1"));

        let report = validate(&table1_config(1.2));
        assert_eq!(report.violations.len(), 1);
        assert!(report.messages()[0].contains("stability requires total load < 1"));

        let mut c = table1_config(0.5);
        c.lambda_l = -0.1;
        c.p_2 = 1.5;
        assert_eq!(validate(&c).violations.len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let c = table2_config(50.0);
        let back = SystemConfig::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn json_layout() {
        let text = r#"{
            "lambda": {"H": 0.1, "L": 0.2, "2": 0.3},
            "service": {
                "H": {"kind": "exponential", "rate": 2.0},
                "L": {"kind": "deterministic", "value": 0.5},
                "2": {"kind": "erlang", "shape": 2, "rate": 4.0}
            },
            "routing": {"p1": 0.4, "p2": 0.3},
            "switchover": {
                "s11": {"kind": "deterministic", "value": 1.0},
                "s12": {"kind": "deterministic", "value": 1.0},
                "s21": {"kind": "exponential", "rate": 1.0},
                "s22": {"kind": "deterministic", "value": 0.0}
            }
        }"#;
        let c = SystemConfig::from_json_str(text).unwrap();
        assert_eq!(c.lambda_l, 0.2);
        assert_eq!(c.b_2, ServiceDistribution::Erlang { shape: 2, rate: 4.0 });
        assert!(SystemConfig::from_json_str("{\"lambda\": 1}").is_err());
    }
}
