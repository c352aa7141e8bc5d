use std::process::{Command, Output};

fn crbopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crbopt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn version_prints_package_version() {
    let o = crbopt(&["version"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), format!("crbopt {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn help_exits_zero_and_bad_usage_exits_one() {
    assert_eq!(crbopt(&["--help"]).status.code(), Some(0));
    assert_eq!(crbopt(&[]).status.code(), Some(1));
    assert_eq!(crbopt(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(crbopt(&["solve", "--n-tx", "many"]).status.code(), Some(1));
    assert_eq!(crbopt(&["solve", "--power-dbm", "3", "--snr-db", "4"]).status.code(), Some(1));
    assert_eq!(crbopt(&["sweep", "--sweep-n-tx", "8,4"]).status.code(), Some(1));
}

#[test]
fn solve_prints_beamformer() {
    let o = crbopt(&["solve", "--n-tx", "4", "--solver", "lpm"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("status      converged"));
    assert!(text.contains("crb_trace"));
    assert!(text.contains("lambda"));
    assert_eq!(text.lines().filter(|l| l.starts_with("p[")).count(), 4);
}

#[test]
fn unobservable_scenario_is_a_numerical_failure() {
    let o = crbopt(&["solve", "--n-tx", "1", "--n-rx", "1", "--solver", "lpm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}

#[test]
fn sweep_writes_csv_and_json_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("out.csv");
    let o = crbopt(&[
        "sweep",
        "--sweep-n-tx",
        "4,8",
        "--trials",
        "2",
        "--n-blocks",
        "64",
        "--seed",
        "5",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("solver,n_tx,power_dbm,crb_trace,iterations,wall_time_ms,trial,seed,status"));
    assert_eq!(lines.count(), 8);

    let json_path = dir.path().join("out.json");
    let o = crbopt(&[
        "sweep",
        "--sweep-n-tx",
        "4",
        "--trials",
        "1",
        "--solver",
        "pgd",
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].as_object().unwrap().len(), 9);
    assert_eq!(rows[0]["solver"], "pgd");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "sweep_n_tx = [4, 8, 16]\ntrials = 1\nsolver = \"lpm\"\nn_blocks = 32\n").unwrap();
    let o = crbopt(&["sweep", "--config", cfg.to_str().unwrap(), "--sweep-n-tx", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("lpm,4,"));

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(crbopt(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn unwritable_output_is_reported_with_path() {
    let o = crbopt(&["sweep", "--sweep-n-tx", "4", "--trials", "1", "--out", "/nonexistent-dir/x.csv"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/x.csv"));
}

#[test]
fn check_passes_by_default_and_flags_unobservable_scenarios() {
    let o = crbopt(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));

    let o = crbopt(&["check", "--n-tx", "1", "--n-rx", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("singular"));
}
