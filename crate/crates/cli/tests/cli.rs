use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mpoll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpoll"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    root.join(name).to_string_lossy().into_owned()
}

fn out(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn read_csv(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn exit_codes() {
    assert_eq!(
        mpoll(&["validate", "--config", &config("table1.json")]).status.code(),
        Some(0)
    );
    assert_eq!(
        mpoll(&["validate", "--config", &config("unstable.json")]).status.code(),
        Some(1)
    );
    assert_eq!(
        mpoll(&["validate", "--config", "/nonexistent/config.json"])
            .status
            .code(),
        Some(3)
    );

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(
        mpoll(&["validate", "--config", garbage.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn unstable_config_names_the_violation() {
    let o = mpoll(&["validate", "--config", &config("unstable.json")]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("load"), "{err}");
}

#[test]
fn analyze_flags_zero_switchover_as_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpoll(&[
        "analyze",
        "--config",
        &config("zero_switchover.json"),
        "--out",
        &out(&dir, "a"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
    let summary = fs::read_to_string(dir.path().join("a/summary.txt")).unwrap();
    assert!(summary.contains("degenerate"), "{summary}");
}

#[test]
fn simulate_writes_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpoll(&[
        "simulate",
        "--config",
        &config("table1.json"),
        "--seed",
        "3",
        "--customers",
        "200000",
        "--out",
        &out(&dir, "s"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(dir.path().join("s/comparison.csv"));
    assert!(header.contains(&"relative_error".to_string()));
    assert!(!rows.is_empty());
    let (header, rows) = read_csv(dir.path().join("s/samples.csv"));
    assert_eq!(header, ["wait_H", "wait_L", "wait_2"]);
    assert!(!rows.is_empty());
}

#[test]
fn single_point_study_has_no_trend_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpoll(&[
        "study",
        "--kind",
        "heavy-traffic",
        "--config",
        &config("table1.json"),
        "--sweep",
        "0.9",
        "--customers",
        "20000",
        "--out",
        &out(&dir, "one"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(dir.path().join("one/summary.csv"));
    assert_eq!(rows.len(), 1);
    assert!(header.iter().all(|h| !h.starts_with("trend")), "{header:?}");
}

#[test]
fn sweep_study_reports_trend_and_monotone_limit_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpoll(&[
        "study",
        "--kind",
        "large-switchover",
        "--config",
        &config("table2.json"),
        "--sweep",
        "50,10",
        "--customers",
        "5000",
        "--out",
        &out(&dir, "ls"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(dir.path().join("ls/summary.csv"));
    assert!(header.iter().any(|h| h.starts_with("trend")));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "10", "sweep is sorted");

    let (header, rows) = read_csv(dir.path().join("ls/cdf_r_10.csv"));
    for (j, name) in header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("limit") || h.starts_with("empirical"))
    {
        let col: Vec<f64> = rows.iter().map(|r| r[j].parse().unwrap()).collect();
        assert!(col.windows(2).all(|w| w[1] >= w[0]), "{name} decreases");
        assert!(col.iter().all(|v| (0.0..=1.0).contains(v)), "{name} leaves [0, 1]");
    }
}

#[test]
fn study_output_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let o = mpoll(&[
            "study",
            "--kind",
            "heavy-traffic",
            "--config",
            &config("table1.json"),
            "--sweep",
            "0.8,0.9",
            "--customers",
            "10000",
            "--seed",
            seed,
            "--out",
            &out(&dir, name),
        ]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(dir.path().join(name).join("summary.csv")).unwrap()
    };
    assert_eq!(run("a", "5"), run("b", "5"));
    assert_ne!(run("a", "5"), run("c", "6"));
}

#[test]
fn invalid_study_arguments_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = mpoll(&[
        "study",
        "--kind",
        "heavy-traffic",
        "--config",
        &config("table1.json"),
        "--sweep",
        "1.2",
        "--out",
        &out(&dir, "bad"),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
