use std::process::{Command, Output};

use qsep_core::harness::{Report, ResultRecord};

fn qsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsep")).args(args).output().expect("failed to launch qsep")
}

fn report(out: &Output) -> Report {
    Report::from_json(&String::from_utf8_lossy(&out.stdout)).expect("stdout is not a report")
}

#[test]
fn suite_fast_exits_zero() {
    let out = qsep(&["suite", "fast", "--seed", "7", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report(&out).all_pass());
}

#[test]
fn unknown_subcommand_exits_two_with_usage() {
    let out = qsep(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_lemma_id_exits_two() {
    assert_eq!(qsep(&["lemma", "L0.0"]).status.code(), Some(2));
}

#[test]
fn over_budget_size_exits_two() {
    let out = qsep(&["attack", "pru", "--lambda", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
}

#[test]
fn lemma_with_globals_emits_one_result() {
    let out = qsep(&["lemma", "L5.8", "--lambda", "2", "--ell", "2", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.results.len(), 1);
    match &r.results[0] {
        ResultRecord::Lemma(l) => {
            assert_eq!(l.lemma_id, "L5.8");
            assert_eq!(l.params.get("lambda"), Some(&2.0));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn failing_check_exits_one() {
    // A 1e-3 Monte-Carlo tolerance on 100 samples cannot be met.
    let out = qsep(&["lemma", "L2.10", "--param", "samples=100", "--param", "tolerance=0.001"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = qsep(&["prfsg-game", "--trials", "20", "--seed", "3", "--no-timing", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        runs.push(std::fs::read(&path).unwrap());
    }
    assert!(runs[0] == runs[1], "reports differ");
}

#[test]
fn csv_output_has_header_plus_one_row_per_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = qsep(&["prfsg-game", "--trials", "20", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().contains("param_lambda"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "lemmas", "lemmas": ["Eq68-choi-norm"], "params": {"n": 2}, "seed": 4}"#).unwrap();
    let out = qsep(&["lemma", "Eq68-choi-norm", "--config", cfg.to_str().unwrap(), "--param", "n=3", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.config.seed, 4);
    match &r.results[0] {
        ResultRecord::Lemma(l) => assert!((l.lhs - 0.5).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"ell": "two"}"#).unwrap();
    let out = qsep(&["suite", "fast", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ell"));
}

#[test]
fn sweep_writes_plot_companion() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let out = qsep(&["lemma", "Eq68-choi-norm", "--sweep", "n=1,2,3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let plot = std::fs::read_to_string(dir.path().join("sweep.plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 4);
}

#[test]
fn attack_pri_vs_hri_runs() {
    let out = qsep(&["attack", "pri-vs-hri", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    match &report(&out).results[0] {
        ResultRecord::Attack(a) => assert!(a.advantage >= 0.9),
        other => panic!("{other:?}"),
    }
}

#[test]
fn run_takes_the_experiment_from_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("support.json");
    std::fs::write(&cfg, format!(r#"{{"experiment": "lemmas", "lemmas": ["L5.8"], "sweep": {{"param": "lambda", "values": [1, 2, 3]}}, "output": {out:?}, "timing": false}}"#)).unwrap();
    let o = qsep(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(dir.path().join("support.plot.csv")).unwrap().lines().count(), 4);
}
