use std::path::Path;
use std::process::{Command, Stdio};

use coftrl::config::parse_config;
use coftrl::harness::{trajectory_header, METRICS_COLUMNS};
use coftrl::runner::{run_experiment, MANIFEST_FILE, METRICS_FILE, TRAJECTORY_FILE};
use coftrl::Error;

const SELFPLAY: &str = r#"
kind = "selfplay"
horizon = 64
seed = 4

[game]
kind = "random_general_sum"
players = 2
actions = 3

[[learners]]
algorithm = "coftrl"
regularizer = { kind = "tsallis" }

[[learners]]
algorithm = "mwu"
regularizer = { kind = "neg_entropy" }
eta = 0.1
"#;

fn configs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn selfplay_writes_schema_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SELFPLAY).unwrap();
    cfg.output = dir.path().join("a");
    run_experiment(&cfg).unwrap();
    cfg.output = dir.path().join("b");
    run_experiment(&cfg).unwrap();
    for f in [TRAJECTORY_FILE, METRICS_FILE] {
        assert_eq!(read(&dir.path().join("a").join(f)), read(&dir.path().join("b").join(f)), "{f}");
    }

    let mut rdr = csv::Reader::from_path(dir.path().join("a").join(TRAJECTORY_FILE)).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, trajectory_header(3));
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 64 * 2);
    for row in &rows {
        let x: f64 = (2..5).map(|k| row[k].parse::<f64>().unwrap()).sum();
        assert!((x - 1.0).abs() < 1e-12);
    }
    // The MWU player records its fixed rate.
    assert!(rows.iter().filter(|r| &r[1] == "1").all(|r| r[5].parse::<f64>() == Ok(0.1)));
    let coftrl_rate: f64 = rows[0][5].parse().unwrap();
    assert!(coftrl_rate > 0.0);

    let mut rdr = csv::Reader::from_path(dir.path().join("a").join(METRICS_FILE)).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, METRICS_COLUMNS.map(String::from));
    let ts: Vec<usize> = rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(ts, vec![1, 1, 2, 2, 4, 4, 8, 8, 16, 16, 32, 32, 64, 64]);
}

#[test]
fn floats_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SELFPLAY).unwrap();
    cfg.output = dir.path().to_path_buf();
    run_experiment(&cfg).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join(TRAJECTORY_FILE)).unwrap();
    for row in rdr.records().take(10) {
        let row = row.unwrap();
        let text = &row[2];
        let v: f64 = text.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), text);
    }
}

#[test]
fn manifest_records_resolved_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SELFPLAY).unwrap();
    cfg.output = dir.path().to_path_buf();
    run_experiment(&cfg).unwrap();
    let manifest: toml::Table = read(&dir.path().join(MANIFEST_FILE)).parse().unwrap();
    let learners = manifest["learners"].as_array().unwrap();
    assert_eq!(learners.len(), 2);
    assert!(learners[0]["eta"].as_float().unwrap() > 0.0);
    assert!(learners[0]["gamma"].as_float().unwrap() > 0.0);
    let config = manifest["config"].as_table().unwrap();
    let q = config["learners"].as_array().unwrap()[0]["regularizer"]["q"].as_float().unwrap();
    assert_eq!(q, 0.5);
}

#[test]
fn config_errors_name_the_field() {
    let cases = [
        (SELFPLAY.replace("horizon = 64", "horizon = 0"), "horizon"),
        (SELFPLAY.replace("eta = 0.1", "eta = -1.0"), "learners[1].eta"),
        (SELFPLAY.replace("{ kind = \"tsallis\" }", "{ kind = \"tsallis\", q = 1.5 }"), "learners[0].regularizer.q"),
        (
            SELFPLAY.replace(
                "algorithm = \"mwu\"\nregularizer = { kind = \"neg_entropy\" }",
                "algorithm = \"mwu\"\nregularizer = { kind = \"log\" }",
            ),
            "learners[1]",
        ),
    ];
    for (text, field) in cases {
        match parse_config(&text) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with(field), "{path} does not start with {field}"),
            other => panic!("expected config error at {field}, got {other:?}"),
        }
    }
    assert!(matches!(parse_config("kind = \"selfplay\"\nbogus = 1\n"), Err(Error::Config { .. })));
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = coftrl::config::load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
    }
}

fn cli() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_coftrl"));
    cmd.stdout(Stdio::null()).stderr(Stdio::null());
    cmd
}

#[test]
fn cli_run_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let status = cli()
        .args(["run", configs_dir().join("adversarial_safeguard.toml").to_str().unwrap()])
        .args(["--horizon", "128", "--seed", "9", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: toml::Table = read(&dir.path().join(MANIFEST_FILE)).parse().unwrap();
    assert_eq!(manifest["config"]["horizon"].as_integer(), Some(128));
    assert_eq!(manifest["config"]["seed"].as_integer(), Some(9));
    let rows = csv::Reader::from_path(dir.path().join(TRAJECTORY_FILE)).unwrap().records().count();
    assert_eq!(rows, 128);
}

#[test]
fn cli_landscape_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let status = cli()
        .args(["landscape", configs_dir().join("landscape.toml").to_str().unwrap(), "--out"])
        .arg(dir.path().join("l"))
        .status()
        .unwrap();
    assert!(status.success());
    let rows = csv::Reader::from_path(dir.path().join("l/landscape.csv")).unwrap().records().count();
    assert_eq!(rows, 4 * 41 * 41);

    let ok =
        cli().args(["verify", "regularizers", "--samples", "200", "--out"]).arg(dir.path().join("v")).status().unwrap();
    assert!(ok.success());
    let bad = cli()
        .args(["verify", "regularizers", "--samples", "200", "--gamma-scale", "0.01", "--out"])
        .arg(dir.path().join("w"))
        .status()
        .unwrap();
    assert_eq!(bad.code(), Some(1));
    let missing = cli().args(["run", "does-not-exist.toml"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));
}
