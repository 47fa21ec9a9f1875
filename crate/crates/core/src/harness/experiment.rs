//! Experiment orchestration.
//!
//! An experiment expands into a list of items (lemma checks and attack
//! runs), which execute on the rayon pool and are collected in list order,
//! so the report does not depend on scheduling. Suites use fixed parameter
//! presets and take only the seed, backend, tomography mode, timing flag and
//! budget from the configuration.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::lemmas::{lemma_check, Params, LEMMA_IDS};
use super::report::{Report, ResultRecord, SweepPoint, Versions};
use crate::adversary::{attack_pri, attack_pri_vs_hri, attack_pru, AttackConfig, AttackKind};
use crate::error::{QsepError, Result};
use crate::haar::SeedPath;
use crate::oracle::{toy_hri_pri_candidate, toy_pri_candidate, toy_pru_candidate, FamilyManifest, HriOracleFamily, Oracles, SwapOracleFamily};

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Lemma { id: String, params: Params },
    Attack(AttackKind),
}

fn lemma(id: &str, kv: &[(&str, f64)]) -> Item {
    Item::Lemma { id: id.to_string(), params: kv.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
}

/// The CI profile: every lemma at its default size, the acceptance-suite
/// variants of the rate and support checks, and the PRU attack.
pub fn fast_suite() -> Vec<Item> {
    let mut items: Vec<Item> = LEMMA_IDS.iter().map(|id| lemma(id, &[])).collect();
    items.extend([
        lemma("L2.10", &[("d", 2.0)]),
        lemma("L5.8", &[("lambda", 1.0)]),
        lemma("L5.8", &[("lambda", 3.0)]),
        Item::Attack(AttackKind::Pru),
    ]);
    items
}

/// The full profile: the fast suite, larger instances of the sampled checks
/// and all three attacks.
pub fn full_suite() -> Vec<Item> {
    let mut items = fast_suite();
    items.extend([
        lemma("L2.1", &[("qubits", 4.0), ("trials", 500.0)]),
        lemma("L2.2", &[("d", 16.0), ("trials", 500.0)]),
        lemma("L2.3", &[("d", 8.0), ("pairs", 1000.0)]),
        lemma("L2.5", &[("trials", 1000.0), ("max_qubits", 6.0)]),
        lemma("L2.12", &[("d", 8.0), ("ell", 2.0)]),
        lemma("L2.12", &[("d", 4.0), ("ell", 3.0)]),
        lemma("T2.9", &[("d", 16.0), ("draws", 2000.0)]),
        lemma("L4.4", &[("pairs", 1000.0)]),
        lemma("L5.6", &[("trials", 10.0)]),
        lemma("L5.10", &[("instances", 200.0)]),
        lemma("L5.11", &[("instances", 200.0)]),
        lemma("C6.8", &[("instances", 500.0)]),
        lemma("L6.11", &[("lambda", 2.0), ("s", 1.0)]),
        lemma("L6.12", &[("n", 3.0), ("bystander", 1.0)]),
        lemma("L7.12", &[("trials", 10.0)]),
        lemma("Eq68-choi-norm", &[("n", 1.0)]),
        lemma("Eq68-choi-norm", &[("n", 5.0)]),
        Item::Attack(AttackKind::Pri),
        Item::Attack(AttackKind::PriVsHri),
    ]);
    items
}

/// Fails unless every dispatch-table id occurs in the full suite.
pub fn assert_suite_complete(items: &[Item]) -> Result<()> {
    let missing: Vec<&str> = LEMMA_IDS
        .iter()
        .copied()
        .filter(|id| !items.iter().any(|it| matches!(it, Item::Lemma { id: i, .. } if i == id)))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(QsepError::Numerical(format!("suite all does not cover {}", missing.join(", "))))
    }
}

fn items_for(cfg: &ExperimentConfig) -> Result<Vec<Item>> {
    let params = cfg.lemma_params();
    Ok(match cfg.experiment {
        ExperimentKind::Lemmas => cfg.lemmas.iter().map(|id| Item::Lemma { id: id.clone(), params: params.clone() }).collect(),
        ExperimentKind::SuiteFast => fast_suite(),
        ExperimentKind::SuiteAll => {
            let items = full_suite();
            assert_suite_complete(&items)?;
            items
        }
        ExperimentKind::AttackPru => vec![Item::Attack(AttackKind::Pru)],
        ExperimentKind::AttackPri => vec![Item::Attack(AttackKind::Pri)],
        ExperimentKind::AttackPriVsHri => vec![Item::Attack(AttackKind::PriVsHri)],
        ExperimentKind::PrfsgGame => {
            let mut game = Params::new();
            game.insert("lambda".into(), cfg.lambda.unwrap_or(2) as f64);
            game.insert("draws".into(), cfg.trials.unwrap_or(200) as f64);
            let mut lip = Params::new();
            lip.insert("pairs".into(), cfg.trials.unwrap_or(100) as f64);
            vec![
                Item::Lemma { id: "L4.3".into(), params: game.clone() },
                Item::Lemma { id: "L4.4".into(), params: lip },
                Item::Lemma { id: "L4.5".into(), params: game },
            ]
        }
    })
}

/// Toy candidate, oracle family and attack settings for an attack item.
fn run_attack(kind: AttackKind, cfg: &ExperimentConfig) -> Result<(ResultRecord, FamilyManifest)> {
    let root = SeedPath::new(cfg.seed).child("attack", kind as u64);
    let lambda = cfg.lambda.unwrap_or(2);
    let keys = cfg.keys.unwrap_or(4);
    let c = cfg.c.unwrap_or(0);
    let acfg = AttackConfig {
        p: cfg.p.unwrap_or(20),
        ell_override: cfg.ell,
        backend: cfg.backend,
        tomography_mode: cfg.tomography,
        seed: root.child("run", 0).derive(),
        timing: cfg.timing,
        ..Default::default()
    };
    let oracle_seed = SeedPath::new(root.child("oracle", 0).derive());
    let cand_seed = root.child("candidate", 0);
    let b = &cfg.budget;
    let report = match kind {
        AttackKind::Pru => {
            let calls = cfg.calls.clone().unwrap_or_else(|| vec![0, 0, 0]);
            let fam = SwapOracleFamily::new(oracle_seed);
            let cand = toy_pru_candidate(lambda, keys, c, &calls, &cand_seed)?;
            (attack_pru(&cand, &Oracles::swap(&fam), &acfg, b)?, fam.manifest())
        }
        AttackKind::Pri => {
            let calls = cfg.calls.clone().unwrap_or_else(|| vec![0, 1]);
            let fam = SwapOracleFamily::new(oracle_seed);
            let cand = toy_pri_candidate(lambda, keys, cfg.s.unwrap_or(1), c, &calls, &cand_seed)?;
            (attack_pri(&cand, &Oracles::swap(&fam), &acfg, b)?, fam.manifest())
        }
        AttackKind::PriVsHri => {
            let calls = cfg.calls.clone().unwrap_or_else(|| vec![0, 0]);
            let fam = HriOracleFamily::new(oracle_seed, cfg.t_function.clone());
            let t = cfg.t_function.clone();
            let cand = toy_hri_pri_candidate(lambda, keys, cfg.s.unwrap_or(0), &calls, &|n| t.eval(n), &cand_seed)?;
            (attack_pri_vs_hri(&cand, &fam, &acfg, b)?, fam.manifest())
        }
    };
    Ok((ResultRecord::Attack(Box::new(report.0)), report.1))
}

fn run_items(cfg: &ExperimentConfig, items: &[Item]) -> Result<(Vec<ResultRecord>, Vec<FamilyManifest>)> {
    let seed = SeedPath::new(cfg.seed);
    let out = items
        .par_iter()
        .map(|it| match it {
            Item::Lemma { id, params } => Ok((ResultRecord::Lemma(lemma_check(id, params, &seed, &cfg.budget, cfg.timing)?), None)),
            Item::Attack(kind) => run_attack(*kind, cfg).map(|(r, m)| (r, Some(m))),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut results = Vec::with_capacity(out.len());
    let mut manifests: Vec<FamilyManifest> = Vec::new();
    for (r, m) in out {
        results.push(r);
        if let Some(m) = m {
            if !manifests.contains(&m) {
                manifests.push(m);
            }
        }
    }
    Ok((results, manifests))
}

fn sweep_y(r: &ResultRecord) -> f64 {
    match r {
        ResultRecord::Lemma(l) => l.ratio,
        ResultRecord::Attack(a) => a.advantage,
    }
}

/// Runs the configured experiment and assembles its report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let mut results = Vec::new();
    let mut manifests = Vec::new();
    let mut sweep = None;
    match &cfg.sweep {
        None => {
            let (r, m) = run_items(cfg, &items_for(cfg)?)?;
            results = r;
            manifests = m;
        }
        Some(sw) => {
            let mut points = Vec::new();
            for &x in &sw.values {
                let sub = cfg.with_param(&sw.param, x)?;
                let (r, m) = run_items(&sub, &items_for(&sub)?)?;
                points.extend(r.iter().map(|rec| SweepPoint { series: rec.id(), x, y: sweep_y(rec) }));
                results.extend(r);
                for m in m {
                    if !manifests.contains(&m) {
                        manifests.push(m);
                    }
                }
            }
            sweep = Some(points);
        }
    }
    Ok(Report {
        config: cfg.clone(),
        results,
        versions: Versions::default(),
        total_runtime_ms: if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 },
        manifests,
        sweep,
    })
}
