//! Circuits made of fixed gates and oracle-call slots, their evaluation
//! and the surrogate rewriting used by the attacks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hri::HriOracleFamily;
use super::swap::SwapOracleFamily;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::linalg::sim::{apply_gate, check_wires};
use crate::linalg::{unitarity_defect, ComplexMatrix, PureState, UnitaryMatrix, C64, UNITARY_TOL};

#[derive(Clone, Debug)]
pub enum Step {
    FixedGate { gate: UnitaryMatrix, wires: Vec<usize> },
    /// `S_n` on `[m register (n), flag, psi register (n)]`.
    OracleCall { n: usize, wires: Vec<usize>, daggered: bool },
    /// `HRI_{t,n,m}` on `[flag, Y (t(n)), x (n)]` with a classical index `m`.
    HriCall { n: usize, m: u64, wires: Vec<usize>, daggered: bool },
}

impl Step {
    pub fn wires(&self) -> &[usize] {
        match self {
            Step::FixedGate { wires, .. } | Step::OracleCall { wires, .. } | Step::HriCall { wires, .. } => wires,
        }
    }

    pub fn is_query(&self) -> bool {
        !matches!(self, Step::FixedGate { .. })
    }
}

#[derive(Clone, Debug)]
pub struct OracleCircuit {
    pub total_qubits: usize,
    pub steps: Vec<Step>,
}

/// The oracle families a circuit may query.
#[derive(Clone, Copy, Debug, Default)]
pub struct Oracles<'a> {
    pub swap: Option<&'a SwapOracleFamily>,
    pub hri: Option<&'a HriOracleFamily>,
}

impl<'a> Oracles<'a> {
    pub fn swap(fam: &'a SwapOracleFamily) -> Self {
        Oracles { swap: Some(fam), hri: None }
    }

    pub fn hri(fam: &'a HriOracleFamily) -> Self {
        Oracles { swap: None, hri: Some(fam) }
    }
}

/// Key of a small oracle that can be replaced by a classical description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OracleKey {
    Swap { n: usize },
    Hri { n: usize, m: u64 },
}

impl OracleKey {
    pub fn n(&self) -> usize {
        match self {
            OracleKey::Swap { n } | OracleKey::Hri { n, .. } => *n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewriteMode {
    /// Calls at or below the cutoff use the supplied (learned) replacements.
    Surrogate,
    /// Calls at or below the cutoff use the true oracle matrices.
    ExactSmall,
}

impl OracleCircuit {
    pub fn new(total_qubits: usize) -> Self {
        OracleCircuit { total_qubits, steps: Vec::new() }
    }

    pub fn push_gate(&mut self, gate: UnitaryMatrix, wires: Vec<usize>) -> &mut Self {
        self.steps.push(Step::FixedGate { gate, wires });
        self
    }

    pub fn push_call(&mut self, n: usize, wires: Vec<usize>) -> &mut Self {
        self.steps.push(Step::OracleCall { n, wires, daggered: false });
        self
    }

    pub fn push_hri(&mut self, n: usize, m: u64, wires: Vec<usize>) -> &mut Self {
        self.steps.push(Step::HriCall { n, m, wires, daggered: false });
        self
    }

    /// Number of oracle-call steps `T`.
    pub fn query_count(&self) -> usize {
        self.steps.iter().filter(|s| s.is_query()).count()
    }

    /// Oracle keys queried by the circuit, with multiplicity.
    pub fn queried_keys(&self) -> Vec<OracleKey> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::OracleCall { n, .. } => Some(OracleKey::Swap { n: *n }),
                Step::HriCall { n, m, .. } => Some(OracleKey::Hri { n: *n, m: *m }),
                Step::FixedGate { .. } => None,
            })
            .collect()
    }

    pub fn validate(&self, oracles: &Oracles) -> Result<()> {
        for step in &self.steps {
            check_wires(self.total_qubits, step.wires())?;
            match step {
                Step::FixedGate { gate, wires } => {
                    if gate.dim() != 1usize << wires.len() {
                        return Err(QsepError::Dimension("fixed gate size does not match its wires".into()));
                    }
                    if unitarity_defect(gate.matrix()) > UNITARY_TOL * 100.0 {
                        return Err(QsepError::InvalidInput("fixed gate is not unitary".into()));
                    }
                }
                Step::OracleCall { n, wires, .. } => {
                    if wires.len() != 2 * n + 1 {
                        return Err(QsepError::Dimension(format!("oracle call on n = {n} needs {} wires", 2 * n + 1)));
                    }
                }
                Step::HriCall { n, wires, .. } => {
                    if let Some(h) = oracles.hri {
                        if wires.len() != n + h.t(*n) + 1 {
                            return Err(QsepError::Dimension(format!("isometry call on n = {n} has the wrong width")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies every step to a raw amplitude vector.
    pub fn apply_in_place(&self, state: &mut [C64], oracles: &Oracles, budget: &Budget) -> Result<()> {
        for step in &self.steps {
            match step {
                Step::FixedGate { gate, wires } => apply_gate(state, self.total_qubits, gate.matrix(), wires)?,
                Step::OracleCall { n, wires, .. } => {
                    let fam = oracles.swap.ok_or_else(|| QsepError::InvalidInput("circuit queries a swap oracle but none was supplied".into()))?;
                    fam.apply_call(*n, state, self.total_qubits, wires)?;
                }
                Step::HriCall { n, m, wires, .. } => {
                    let fam = oracles
                        .hri
                        .ok_or_else(|| QsepError::InvalidInput("circuit queries an isometry oracle but none was supplied".into()))?;
                    fam.apply_call(*n, *m, state, self.total_qubits, wires, budget)?;
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, oracles: &Oracles, input: &PureState, budget: &Budget) -> Result<PureState> {
        if input.qubits() != self.total_qubits {
            return Err(QsepError::Dimension(format!(
                "input has {} qubits, circuit has {}",
                input.qubits(),
                self.total_qubits
            )));
        }
        let mut amps: Vec<C64> = input.amplitudes().iter().cloned().collect();
        self.apply_in_place(&mut amps, oracles, budget)?;
        Ok(PureState::trusted(nalgebra::DVector::from_vec(amps)))
    }

    /// Full matrix assembled column by column from basis evaluations.
    pub fn unitary(&self, oracles: &Oracles, budget: &Budget) -> Result<UnitaryMatrix> {
        budget.check_qubits("circuit unitary", self.total_qubits)?;
        self.validate(oracles)?;
        let dim = 1usize << self.total_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut col = vec![C64::new(0.0, 0.0); dim];
            col[c] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut col, oracles, budget)?;
            for (r, z) in col.iter().enumerate() {
                m[(r, c)] = *z;
            }
        }
        let defect = unitarity_defect(&m);
        if defect > 1e-8 {
            return Err(QsepError::Numerical(format!("circuit unitary has defect {defect:.3e}")));
        }
        Ok(UnitaryMatrix::trusted(m))
    }

    /// True once every oracle call has been rewritten away.
    pub fn is_oracle_free(&self) -> bool {
        self.query_count() == 0
    }
}

pub fn evaluate_circuit(circ: &OracleCircuit, oracles: &Oracles, input: &PureState, budget: &Budget) -> Result<PureState> {
    circ.evaluate(oracles, input, budget)
}

pub fn circuit_unitary(circ: &OracleCircuit, oracles: &Oracles, budget: &Budget) -> Result<UnitaryMatrix> {
    circ.unitary(oracles, budget)
}

/// Dense matrix of the true oracle behind `key`.
pub fn true_oracle(key: OracleKey, oracles: &Oracles, budget: &Budget) -> Result<UnitaryMatrix> {
    match key {
        OracleKey::Swap { n } => oracles
            .swap
            .ok_or_else(|| QsepError::InvalidInput("no swap family supplied".into()))?
            .dense_oracle(n, budget),
        OracleKey::Hri { n, m } => oracles
            .hri
            .ok_or_else(|| QsepError::InvalidInput("no isometry family supplied".into()))?
            .dense_oracle(n, m, budget),
    }
}

/// Replaces every call with `n <= d_cutoff` by a fixed gate and deletes
/// every call with `n > d_cutoff`. In surrogate mode the gates come from
/// `replacements`; in exact-small mode they are the true oracles.
pub fn rewrite_surrogate(
    circ: &OracleCircuit,
    d_cutoff: usize,
    replacements: &BTreeMap<OracleKey, UnitaryMatrix>,
    mode: RewriteMode,
    oracles: &Oracles,
    budget: &Budget,
) -> Result<OracleCircuit> {
    let mut out = OracleCircuit::new(circ.total_qubits);
    let mut exact_cache: BTreeMap<OracleKey, UnitaryMatrix> = BTreeMap::new();
    for step in &circ.steps {
        let (key, daggered) = match step {
            Step::FixedGate { .. } => {
                out.steps.push(step.clone());
                continue;
            }
            Step::OracleCall { n, daggered, .. } => (OracleKey::Swap { n: *n }, *daggered),
            Step::HriCall { n, m, daggered, .. } => (OracleKey::Hri { n: *n, m: *m }, *daggered),
        };
        if key.n() > d_cutoff {
            continue;
        }
        let gate = match mode {
            RewriteMode::Surrogate => replacements
                .get(&key)
                .cloned()
                .ok_or_else(|| QsepError::InvalidInput(format!("no replacement supplied for {key:?}")))?,
            RewriteMode::ExactSmall => {
                if !exact_cache.contains_key(&key) {
                    exact_cache.insert(key, true_oracle(key, oracles, budget)?);
                }
                exact_cache[&key].clone()
            }
        };
        let gate = if daggered { gate.adjoint() } else { gate };
        out.steps.push(Step::FixedGate { gate, wires: step.wires().to_vec() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{haar_unitary_with, SeedPath};
    use crate::linalg::{diamond_distance_unitary, max_abs_diff};

    fn toy_circuit(seed: u64) -> OracleCircuit {
        let mut rng = SeedPath::new(seed).rng();
        let mut c = OracleCircuit::new(4);
        c.push_gate(haar_unitary_with(&mut rng, 8), vec![0, 1, 2]);
        c.push_call(1, vec![1, 2, 3]);
        c.push_gate(haar_unitary_with(&mut rng, 4), vec![3, 0]);
        c.push_call(0, vec![2]);
        c.push_call(1, vec![0, 3, 1]);
        c
    }

    #[test]
    fn empty_circuit_is_identity() {
        let fam = SwapOracleFamily::new(SeedPath::new(1));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let c = OracleCircuit::new(3);
        let psi = crate::haar::sample_haar_state(8, &SeedPath::new(2)).unwrap();
        assert_eq!(c.evaluate(&o, &psi, &b).unwrap(), psi);
        assert!(max_abs_diff(c.unitary(&o, &b).unwrap().matrix(), &ComplexMatrix::identity(8, 8)) < 1e-15);
    }

    #[test]
    fn single_call_matches_direct_application() {
        let fam = SwapOracleFamily::new(SeedPath::new(3));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let mut c = OracleCircuit::new(3);
        c.push_call(1, vec![0, 1, 2]);
        let psi = crate::haar::sample_haar_state(8, &SeedPath::new(4)).unwrap();
        let direct = super::super::swap::apply_oracle_call(&fam, 1, &psi, &[0, 1, 2], false).unwrap();
        assert_eq!(c.evaluate(&o, &psi, &b).unwrap(), direct);
        assert_eq!(c.query_count(), 1);
    }

    #[test]
    fn unitary_columns_match_evaluation() {
        let fam = SwapOracleFamily::new(SeedPath::new(5));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let c = toy_circuit(6);
        let u = c.unitary(&o, &b).unwrap();
        assert!(unitarity_defect(u.matrix()) < 1e-10);
        let psi = crate::haar::sample_haar_state(16, &SeedPath::new(7)).unwrap();
        let out = c.evaluate(&o, &psi, &b).unwrap();
        assert!((u.matrix() * psi.amplitudes() - out.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn rewrite_modes() {
        let fam = SwapOracleFamily::new(SeedPath::new(8));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let c = toy_circuit(9);
        let truth = c.unitary(&o, &b).unwrap();
        let mut reps = BTreeMap::new();
        for n in 0..=1 {
            reps.insert(OracleKey::Swap { n }, fam.dense_oracle(n, &b).unwrap());
        }
        let sur = rewrite_surrogate(&c, 1, &reps, RewriteMode::Surrogate, &o, &b).unwrap();
        assert!(sur.is_oracle_free());
        let su = sur.unitary(&Oracles::default(), &b).unwrap();
        assert!(diamond_distance_unitary(&su, &truth).unwrap() < 1e-9);
        let exact = rewrite_surrogate(&c, 1, &BTreeMap::new(), RewriteMode::ExactSmall, &o, &b).unwrap();
        assert!(max_abs_diff(exact.unitary(&Oracles::default(), &b).unwrap().matrix(), su.matrix()) < 1e-14);
        // Cutoff below every n: only fixed gates remain.
        let none = rewrite_surrogate(&c, 0, &reps, RewriteMode::Surrogate, &o, &b).unwrap();
        assert_eq!(none.steps.len(), c.steps.len() - 2);
        let missing = rewrite_surrogate(&c, 1, &BTreeMap::new(), RewriteMode::Surrogate, &o, &b);
        assert!(missing.is_err());
    }

    #[test]
    fn perturbed_replacements_stay_within_query_sum() {
        let fam = SwapOracleFamily::new(SeedPath::new(10));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let c = toy_circuit(11);
        let mut reps = BTreeMap::new();
        let mut eps = BTreeMap::new();
        for n in 0..=1usize {
            let truth = fam.dense_oracle(n, &b).unwrap();
            let dim = truth.dim();
            let mut rng = SeedPath::new(12 + n as u64).rng();
            let h = crate::linalg::random::gaussian_matrix(&mut rng, dim, dim);
            let h = (&h + h.adjoint()) * C64::new(0.01, 0.0);
            let kick = crate::linalg::hermitian_eigen(&h);
            let phases: Vec<C64> = kick.values.iter().map(|&x| C64::new(0.0, x).exp()).collect();
            let mut diag = kick.vectors.clone();
            for (j, p) in phases.iter().enumerate() {
                for i in 0..dim {
                    diag[(i, j)] *= p;
                }
            }
            let w = diag * kick.vectors.adjoint();
            let approx = UnitaryMatrix::trusted(truth.matrix() * w);
            eps.insert(n, diamond_distance_unitary(&approx, &truth).unwrap());
            reps.insert(OracleKey::Swap { n }, approx);
        }
        let sur = rewrite_surrogate(&c, 1, &reps, RewriteMode::Surrogate, &o, &b).unwrap().unitary(&Oracles::default(), &b).unwrap();
        let ex = rewrite_surrogate(&c, 1, &reps, RewriteMode::ExactSmall, &o, &b).unwrap().unitary(&Oracles::default(), &b).unwrap();
        let bound: f64 = c.queried_keys().iter().map(|k| eps[&k.n()]).sum();
        assert!(diamond_distance_unitary(&sur, &ex).unwrap() <= bound + 1e-12);
    }
}
