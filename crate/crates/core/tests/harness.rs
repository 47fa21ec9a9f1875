//! End-to-end runs of the experiment harness: configuration in, report out.

use qsep_core::harness::{emit_report, run_experiment, ExperimentConfig, ExperimentKind, Report, ReportFormat, ResultRecord, LEMMA_IDS};

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

#[test]
fn fast_suite_covers_every_lemma_and_passes() {
    let cfg = config(r#"{"experiment": "suite-fast", "timing": false}"#);
    let report = run_experiment(&cfg).unwrap();
    for id in LEMMA_IDS {
        assert!(report.results.iter().any(|r| r.id() == *id), "missing {id}");
    }
    assert!(report.results.iter().any(|r| matches!(r, ResultRecord::Attack(_))));
    assert!(report.all_pass());
    assert!(!report.manifests.is_empty());
}

#[test]
fn reports_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(r#"{"experiment": "lemmas", "lemmas": ["C6.8", "L2.1"], "timing": false}"#);
    let report = run_experiment(&cfg).unwrap();
    let json = dir.path().join("r.json");
    emit_report(&report, ReportFormat::Json, &json).unwrap();
    assert_eq!(Report::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap(), report);
    let csv = dir.path().join("r.csv");
    emit_report(&report, ReportFormat::Csv, &csv).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn same_seed_gives_identical_reports() {
    let cfg = config(r#"{"experiment": "attack-pru", "seed": 11, "timing": false}"#);
    let a = run_experiment(&cfg).unwrap().to_json().unwrap();
    let b = run_experiment(&cfg).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweeps_record_one_point_per_value() {
    let cfg = config(r#"{"experiment": "lemmas", "lemmas": ["L5.8"], "sweep": {"param": "lambda", "values": [1, 2, 3]}, "timing": false}"#);
    let report = run_experiment(&cfg).unwrap();
    let points = report.sweep.as_ref().unwrap();
    assert_eq!(points.len(), 3);
    assert!(points.windows(2).all(|w| w[0].x < w[1].x));
    assert!(report.plot_csv().unwrap().starts_with("series,x,y"));
}

#[test]
fn prfsg_game_uses_the_configured_lambda() {
    let cfg = config(r#"{"experiment": "prfsg-game", "lambda": 2, "trials": 50, "timing": false}"#);
    assert_eq!(cfg.experiment, ExperimentKind::PrfsgGame);
    let report = run_experiment(&cfg).unwrap();
    let ids: Vec<String> = report.results.iter().map(|r| r.id()).collect();
    assert_eq!(ids, ["L4.3", "L4.4", "L4.5"]);
    for r in report.results.iter().filter(|r| r.id() != "L4.4") {
        assert_eq!(r.params().get("lambda"), Some(&2.0), "{}", r.id());
    }
}
