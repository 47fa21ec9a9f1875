//! Learning the small oracles and rewriting the keyed circuits into
//! oracle-free surrogates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Candidate;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::SeedPath;
use crate::linalg::{diamond_distance_unitary, UnitaryMatrix};
use crate::oracle::circuit::true_oracle;
use crate::oracle::{rewrite_surrogate, OracleCircuit, OracleKey, Oracles, RewriteMode};
use crate::tomography::{process_tomography, TomographyMode};

/// Classical description of one small oracle obtained by tomography.
#[derive(Clone, Debug)]
pub struct LearnedOracle {
    pub key: OracleKey,
    pub estimate: UnitaryMatrix,
    /// Diamond distance to the true oracle, measured by the simulator.
    pub diamond_error: f64,
    pub shots_used: u64,
}

fn key_seed(seed: &SeedPath, key: &OracleKey) -> SeedPath {
    match key {
        OracleKey::Swap { n } => seed.child("swap", *n as u64),
        OracleKey::Hri { n, m } => seed.child("hri", *n as u64).child("m", *m),
    }
}

/// Runs process tomography on every listed oracle.
pub fn learn_oracles(
    keys: &[OracleKey],
    oracles: &Oracles,
    mode: TomographyMode,
    eps: f64,
    eta: f64,
    seed: &SeedPath,
    budget: &Budget,
) -> Result<Vec<LearnedOracle>> {
    keys.par_iter()
        .map(|key| {
            let truth = true_oracle(*key, oracles, budget)?;
            let r = process_tomography(&truth, mode, eps, eta, &key_seed(seed, key))?;
            let diamond_error = diamond_distance_unitary(&r.estimate, &truth)?;
            Ok(LearnedOracle { key: *key, estimate: r.estimate, diamond_error, shots_used: r.shots_used })
        })
        .collect()
}

/// Oracle-free rewrites `V_k` (learned replacements) and `V~_k` (true small
/// oracles), both with calls above the cutoff deleted.
#[derive(Clone, Debug)]
pub struct SurrogateFamily {
    pub circuits: Vec<OracleCircuit>,
    pub exact_small: Vec<OracleCircuit>,
    pub d_cutoff: usize,
    pub replacement_errors: Vec<(OracleKey, f64)>,
    /// Oracle calls removed because their size exceeds the cutoff, summed over keys.
    pub deleted_calls: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSummary {
    pub d_cutoff: usize,
    pub replacement_errors: Vec<(OracleKey, f64)>,
    pub deleted_calls: usize,
}

impl SurrogateFamily {
    pub fn max_replacement_error(&self) -> f64 {
        self.replacement_errors.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> SurrogateSummary {
        SurrogateSummary {
            d_cutoff: self.d_cutoff,
            replacement_errors: self.replacement_errors.clone(),
            deleted_calls: self.deleted_calls,
        }
    }
}

/// Distinct oracle keys queried by the candidate with `n <= d_cutoff`.
pub fn small_keys(cand: &Candidate, d_cutoff: usize) -> Vec<OracleKey> {
    let mut keys: Vec<OracleKey> = cand.circuits().iter().flat_map(|c| c.queried_keys()).filter(|k| k.n() <= d_cutoff).collect();
    keys.sort();
    keys.dedup();
    keys
}

pub fn build_surrogates(
    cand: &Candidate,
    learned: &[LearnedOracle],
    d_cutoff: usize,
    oracles: &Oracles,
    budget: &Budget,
) -> Result<SurrogateFamily> {
    let replacements: BTreeMap<OracleKey, UnitaryMatrix> = learned.iter().map(|l| (l.key, l.estimate.clone())).collect();
    if let Some(missing) = small_keys(cand, d_cutoff).into_iter().find(|k| !replacements.contains_key(k)) {
        return Err(QsepError::InvalidInput(format!("no tomography result for {missing:?}")));
    }
    let circuits = cand
        .circuits()
        .iter()
        .map(|c| rewrite_surrogate(c, d_cutoff, &replacements, RewriteMode::Surrogate, oracles, budget))
        .collect::<Result<Vec<_>>>()?;
    let exact_small = cand
        .circuits()
        .iter()
        .map(|c| rewrite_surrogate(c, d_cutoff, &replacements, RewriteMode::ExactSmall, oracles, budget))
        .collect::<Result<Vec<_>>>()?;
    let deleted_calls = cand.circuits().iter().flat_map(|c| c.queried_keys()).filter(|k| k.n() > d_cutoff).count();
    let replacement_errors = learned.iter().filter(|l| l.key.n() <= d_cutoff).map(|l| (l.key, l.diamond_error)).collect();
    Ok(SurrogateFamily { circuits, exact_small, d_cutoff, replacement_errors, deleted_calls })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::choi::{choi_from_unitaries, candidate_shape, keyed_choi};
    use crate::oracle::{toy_pru_candidate, SwapOracleFamily};

    fn unitaries(circs: &[OracleCircuit], b: &Budget) -> Vec<UnitaryMatrix> {
        circs.iter().map(|c| c.unitary(&Oracles::default(), b).unwrap()).collect()
    }

    #[test]
    fn exact_tomography_reproduces_candidate() {
        let fam = SwapOracleFamily::new(SeedPath::new(1));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let cand = toy_pru_candidate(2, 2, 1, &[0, 1, 0], &SeedPath::new(2)).unwrap();
        let view = Candidate::Pru(&cand);
        let keys = small_keys(&view, 5);
        assert_eq!(keys.len(), 2);
        let learned = learn_oracles(&keys, &o, TomographyMode::Exact, 0.1, 0.1, &SeedPath::new(3), &b).unwrap();
        let sf = build_surrogates(&view, &learned, 5, &o, &b).unwrap();
        assert_eq!(sf.deleted_calls, 0);
        assert!(sf.circuits.iter().all(|c| c.is_oracle_free()));
        for (ki, u) in unitaries(&sf.circuits, &b).iter().enumerate() {
            let truth = cand.unitary(ki, &o, &b).unwrap();
            assert!(diamond_distance_unitary(u, &truth).unwrap() < 1e-8);
        }
    }

    #[test]
    fn surrogate_and_exact_small_differ_by_at_most_t_eps() {
        let fam = SwapOracleFamily::new(SeedPath::new(4));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let cand = toy_pru_candidate(2, 2, 1, &[0, 1, 1], &SeedPath::new(5)).unwrap();
        let view = Candidate::Pru(&cand);
        let keys = small_keys(&view, 5);
        let learned = learn_oracles(&keys, &o, TomographyMode::Sampled, 0.2, 0.1, &SeedPath::new(6), &b).unwrap();
        let sf = build_surrogates(&view, &learned, 5, &o, &b).unwrap();
        let eps = sf.max_replacement_error();
        assert!(eps > 0.0);
        let t = cand.query_count() as f64;
        for (v, w) in unitaries(&sf.circuits, &b).iter().zip(unitaries(&sf.exact_small, &b)) {
            assert!(diamond_distance_unitary(v, &w).unwrap() <= t * eps + 1e-10);
        }
    }

    #[test]
    fn deleting_large_calls_moves_choi_state_boundedly() {
        let fam = SwapOracleFamily::new(SeedPath::new(7));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let cand = toy_pru_candidate(2, 2, 3, &[1, 2], &SeedPath::new(8)).unwrap();
        let view = Candidate::Pru(&cand);
        let learned = learn_oracles(&small_keys(&view, 1), &o, TomographyMode::Exact, 0.1, 0.1, &SeedPath::new(9), &b).unwrap();
        let sf = build_surrogates(&view, &learned, 1, &o, &b).unwrap();
        assert_eq!(sf.deleted_calls, 2);
        let shape = candidate_shape(&view, 1);
        let keyed = keyed_choi(&view, &o, 1, &b).unwrap();
        let sur = choi_from_unitaries(&unitaries(&sf.circuits, &b), &shape, &b).unwrap();
        let dist = keyed.trace_norm_diff(&sur).unwrap();
        let term = 2f64.powf(1.5) * 1.0 * 1.0 / 2f64.powf(0.5);
        assert!(dist <= term, "{dist}");
        assert!(dist > 1e-6);
    }

    #[test]
    fn missing_tomography_is_an_error() {
        let fam = SwapOracleFamily::new(SeedPath::new(10));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let cand = toy_pru_candidate(2, 1, 1, &[1], &SeedPath::new(11)).unwrap();
        assert!(build_surrogates(&Candidate::Pru(&cand), &[], 3, &o, &b).is_err());
    }
}
