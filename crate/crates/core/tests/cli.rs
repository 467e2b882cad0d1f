use std::path::Path;
use std::process::Command;

fn tumorsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tumorsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn simulate_into(dir: &Path) -> std::process::Output {
    tumorsim(&[
        "simulate",
        "--set",
        "mesh.n_cells=32",
        "--dt",
        "0.5",
        "--t-end",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn simulate_writes_identical_outputs_on_rerun() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = simulate_into(dir);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["trajectory.csv", "mesh.txt"] {
        let first = std::fs::read(a.path().join(name)).unwrap();
        let second = std::fs::read(b.path().join(name)).unwrap();
        assert!(!first.is_empty(), "{name} is empty");
        assert_eq!(first, second, "{name} differs between runs");
    }
    let config = |dir: &Path| {
        let text = std::fs::read_to_string(dir.join("config.toml")).unwrap();
        text.lines().filter(|l| !l.starts_with("output_dir")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(config(a.path()), config(b.path()));
    let header = std::fs::read_to_string(a.path().join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,"), "{header}");
}

#[test]
fn validate_accepts_defaults() {
    let out = tumorsim(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("configuration valid"));
}

#[test]
fn validate_rejects_negative_mobility() {
    let out = tumorsim(&["validate", "--set", "model.M_T=-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_key_fails() {
    let out = tumorsim(&["validate", "--set", "model.not_a_parameter=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(tumorsim(&[]).status.code(), Some(2));
    assert_eq!(tumorsim(&["simulate", "--bogus"]).status.code(), Some(2));
}

#[test]
fn fit_data_reports_a_finite_misfit() {
    let dir = tempfile::tempdir().unwrap();
    let out = tumorsim(&[
        "fit-data",
        "--set",
        "sensitivity.n_cells=32",
        "--set",
        "sensitivity.dt=0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let value: f64 = stdout.trim().strip_prefix("misfit ").unwrap().parse().unwrap();
    assert!(value.is_finite() && value > 0.0);
    assert!(dir.path().join("fit.csv").exists());
}
