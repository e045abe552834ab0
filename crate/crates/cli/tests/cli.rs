use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_deltaomics"));
    cmd.env_remove("DELTAOMICS_OUT").env_remove("RUST_LOG");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small feature-mode cohort with a one-point grid so the sweep is quick.
fn write_config(dir: &Path) -> std::path::PathBuf {
    let cfg = serde_json::json!({
        "cv": { "seed": 9, "n_repeats": 1, "inner_selection_repeats": 1 },
        "synthetic": { "n_features": 25, "n_informative": 3 },
        "scenarios": ["R_init", "RD_all"],
        "kernels": ["rbf"],
        "max_features": 2,
        "grids": { "rbf": { "C": [1.0], "epsilon": [0.01], "gamma": ["1/d"] } }
    });
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    p
}

#[test]
fn full_feature_mode_flow() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");

    let o = run(bin().arg("--config").arg(&cfg).arg("--out").arg(&out).arg("synth"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("features/R_init.csv").is_file());
    assert!(out.join("features/labels.csv").is_file());
    assert!(out.join("synthetic/ground_truth.json").is_file());

    let o = run(bin()
        .args(["--criterion", "X_cnt", "--scenario", "R_init"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("select"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("selection/R_init_X_cnt.json").is_file());
    assert!(!out.join("selection/R_init_X_abs.json").exists());

    let o = run(bin()
        .args(["--criterion", "X_abs", "--scenario", "RD_all"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("evaluate"));
    assert!(o.status.success(), "{}", stderr(&o));
    let eval = out.join("evaluation/RD_all/X_abs");
    for f in ["sweep.csv", "best_of.csv", "rbf/n01.json", "rbf/n02.json", "scatter_rbf.csv"] {
        assert!(eval.join(f).is_file(), "missing {f}");
    }

    let o = run(bin().arg("--out").arg(&out).arg("report"));
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("| Scenario |"));
    assert!(out.join("report/summary.json").is_file());
    assert!(out.join("report/summary.md").is_file());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("env-out");
    let o = run(bin().env("DELTAOMICS_OUT", &out).arg("--config").arg(&cfg).arg("synth"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("features/labels.csv").is_file());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let labels = |seed: &str| {
        let out = dir.path().join(format!("seed-{seed}"));
        let o = run(bin().args(["--seed", seed]).arg("--config").arg(&cfg).arg("--out").arg(&out).arg("synth"));
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(out.join("features/labels.csv")).unwrap()
    };
    assert_eq!(labels("3"), labels("3"));
    assert_ne!(labels("3"), labels("4"));
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().arg("--out").arg(dir.path()).arg("synth"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{ \"cv\": { \"n_folds\": \"five\" } }").unwrap();
    let o = run(bin().arg("--config").arg(&p).arg("--out").arg(dir.path()).arg("synth"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("bad.json"));

    let o = run(bin().arg("--config").arg(dir.path().join("absent.json")).arg("synth"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_inputs_exit_3_and_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["--seed", "1", "--scenario", "D_init"]).arg("--out").arg(dir.path()).arg("select"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("D_init.csv"), "{}", stderr(&o));

    let o = run(bin().arg("--out").arg(dir.path()).arg("report"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let o = run(bin().args(["--seed", "1"]).arg("--out").arg(dir.path()).arg("extract"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("manifest.json"), "{}", stderr(&o));
}

#[test]
fn unknown_scenario_is_rejected() {
    let o = run(bin().args(["--seed", "1", "--scenario", "X_all", "select"]));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("X_all"));
}
