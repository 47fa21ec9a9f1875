//! Keyed PRU and PRI candidates given as oracle circuits, the small toy
//! candidates used by the attacks, and the ancilla-purity validator.
//!
//! Register layout of a candidate circuit: input `lambda` qubits first,
//! then `s` stretch qubits (PRI only), then `c` work ancillas. The output
//! of a PRI candidate is the first `lambda + s` qubits.

use serde::{Deserialize, Serialize};

use super::circuit::{OracleCircuit, Oracles};
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::{haar_state_with, haar_unitary_with, SeedPath};
use crate::linalg::{reduced_from_vector, ComplexMatrix, PureState, UnitaryMatrix, C64};

/// Smallest `ell` with `2^ell >= |K|`.
pub fn ell_for_keys(keys: usize) -> usize {
    let mut ell = 0;
    while (1usize << ell) < keys {
        ell += 1;
    }
    ell
}

#[derive(Clone, Debug)]
pub struct PruCandidate {
    pub lambda: usize,
    pub keys: Vec<u64>,
    pub circuits: Vec<OracleCircuit>,
    pub ancilla_count: usize,
}

#[derive(Clone, Debug)]
pub struct PriCandidate {
    pub lambda: usize,
    pub keys: Vec<u64>,
    pub circuits: Vec<OracleCircuit>,
    pub stretch: usize,
    pub ancilla_count: usize,
}

/// Worst and mean probability that the ancillas are not returned to `|0^c>`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AncillaReport {
    pub trials: usize,
    pub max_defect: f64,
    pub mean_defect: f64,
}

impl AncillaReport {
    pub fn clean(&self, tol: f64) -> bool {
        self.max_defect <= tol
    }
}

fn check_circuits(circuits: &[OracleCircuit], keys: usize, width: usize) -> Result<()> {
    if keys == 0 {
        return Err(QsepError::InvalidInput("a candidate needs at least one key".into()));
    }
    if circuits.len() != keys {
        return Err(QsepError::InvalidInput(format!("{} circuits for {keys} keys", circuits.len())));
    }
    if let Some(c) = circuits.iter().find(|c| c.total_qubits != width) {
        return Err(QsepError::Dimension(format!("circuit has {} qubits, expected {width}", c.total_qubits)));
    }
    Ok(())
}

/// Columns of `u` whose trailing `zeros` qubits are `|0>`, i.e. `U(I ⊗ |0^zeros>)`.
pub fn isometry_columns(u: &ComplexMatrix, zeros: usize) -> ComplexMatrix {
    let step = 1usize << zeros;
    let cols = u.ncols() / step;
    u.select_columns((0..cols).map(|x| x * step).collect::<Vec<_>>().iter())
}

fn ancilla_defect(out: &PureState, ancillas: usize) -> f64 {
    if ancillas == 0 {
        return 0.0;
    }
    let step = 1usize << ancillas;
    let clean: f64 = out.amplitudes().iter().enumerate().filter(|(i, _)| i % step == 0).map(|(_, z)| z.norm_sqr()).sum();
    (1.0 - clean).max(0.0)
}

fn validate_ancillas(
    circuits: &[OracleCircuit],
    input_qubits: usize,
    zero_qubits: usize,
    ancillas: usize,
    oracles: &Oracles,
    trials: usize,
    seed: &SeedPath,
    budget: &Budget,
) -> Result<AncillaReport> {
    let mut report = AncillaReport { trials: 0, max_defect: 0.0, mean_defect: 0.0 };
    let mut total = 0.0;
    for (ki, circ) in circuits.iter().enumerate() {
        for trial in 0..trials {
            let mut rng = seed.child("key", ki as u64).child("trial", trial as u64).rng();
            let psi = haar_state_with(&mut rng, 1usize << input_qubits);
            let input = psi.tensor(&PureState::zero(zero_qubits));
            let out = circ.evaluate(oracles, &input, budget)?;
            let d = ancilla_defect(&out, ancillas);
            report.max_defect = report.max_defect.max(d);
            total += d;
            report.trials += 1;
        }
    }
    report.mean_defect = if report.trials > 0 { total / report.trials as f64 } else { 0.0 };
    Ok(report)
}

impl PruCandidate {
    pub fn new(lambda: usize, keys: Vec<u64>, circuits: Vec<OracleCircuit>, ancilla_count: usize) -> Result<Self> {
        check_circuits(&circuits, keys.len(), lambda + ancilla_count)?;
        Ok(PruCandidate { lambda, keys, circuits, ancilla_count })
    }

    pub fn key_count(&self) -> usize {
        self.keys.len()
    }

    pub fn ell(&self) -> usize {
        ell_for_keys(self.keys.len())
    }

    /// Largest query count `T` over the keys.
    pub fn query_count(&self) -> usize {
        self.circuits.iter().map(|c| c.query_count()).max().unwrap_or(0)
    }

    pub fn max_oracle_n(&self) -> Option<usize> {
        self.circuits.iter().flat_map(|c| c.queried_keys()).map(|k| k.n()).max()
    }

    /// Full unitary of key index `ki` on the joint `lambda + c` register.
    pub fn unitary(&self, ki: usize, oracles: &Oracles, budget: &Budget) -> Result<UnitaryMatrix> {
        self.circuits[ki].unitary(oracles, budget)
    }

    /// `U_k (I ⊗ |0^c>)`, the columns with clean input ancillas.
    pub fn isometry(&self, ki: usize, oracles: &Oracles, budget: &Budget) -> Result<ComplexMatrix> {
        Ok(isometry_columns(self.unitary(ki, oracles, budget)?.matrix(), self.ancilla_count))
    }

    pub fn validate_ancillas(&self, oracles: &Oracles, trials: usize, seed: &SeedPath, budget: &Budget) -> Result<AncillaReport> {
        validate_ancillas(&self.circuits, self.lambda, self.ancilla_count, self.ancilla_count, oracles, trials, seed, budget)
    }
}

impl PriCandidate {
    pub fn new(lambda: usize, keys: Vec<u64>, circuits: Vec<OracleCircuit>, stretch: usize, ancilla_count: usize) -> Result<Self> {
        check_circuits(&circuits, keys.len(), lambda + stretch + ancilla_count)?;
        Ok(PriCandidate { lambda, keys, circuits, stretch, ancilla_count })
    }

    pub fn key_count(&self) -> usize {
        self.keys.len()
    }

    pub fn ell(&self) -> usize {
        ell_for_keys(self.keys.len())
    }

    pub fn query_count(&self) -> usize {
        self.circuits.iter().map(|c| c.query_count()).max().unwrap_or(0)
    }

    pub fn max_oracle_n(&self) -> Option<usize> {
        self.circuits.iter().flat_map(|c| c.queried_keys()).map(|k| k.n()).max()
    }

    pub fn unitary(&self, ki: usize, oracles: &Oracles, budget: &Budget) -> Result<UnitaryMatrix> {
        self.circuits[ki].unitary(oracles, budget)
    }

    /// `U_k (I ⊗ |0^{s+c}>)` as a `2^{lambda+s+c} x 2^lambda` matrix.
    pub fn isometry(&self, ki: usize, oracles: &Oracles, budget: &Budget) -> Result<ComplexMatrix> {
        Ok(isometry_columns(self.unitary(ki, oracles, budget)?.matrix(), self.stretch + self.ancilla_count))
    }

    /// Output state `I_k(|psi>)` on `lambda + s` qubits, with the `c` work
    /// ancillas traced out.
    pub fn apply(&self, ki: usize, psi: &PureState, oracles: &Oracles, budget: &Budget) -> Result<ComplexMatrix> {
        let input = psi.tensor(&PureState::zero(self.stretch + self.ancilla_count));
        let out = self.circuits[ki].evaluate(oracles, &input, budget)?;
        reduced_from_vector(out.amplitudes(), &[self.lambda + self.stretch, self.ancilla_count], &[0])
    }

    pub fn validate_ancillas(&self, oracles: &Oracles, trials: usize, seed: &SeedPath, budget: &Budget) -> Result<AncillaReport> {
        validate_ancillas(
            &self.circuits,
            self.lambda,
            self.stretch + self.ancilla_count,
            self.ancilla_count,
            oracles,
            trials,
            seed,
            budget,
        )
    }
}

/// Builds one keyed circuit: a Haar gate on all wires, then for each call
/// the oracle on the leading wires followed by a fresh Haar gate.
fn keyed_circuit(width: usize, calls: &[(usize, u64)], hri_widths: Option<&dyn Fn(usize) -> usize>, seed: &SeedPath) -> Result<OracleCircuit> {
    let mut circ = OracleCircuit::new(width);
    let all: Vec<usize> = (0..width).collect();
    circ.push_gate(haar_unitary_with(&mut seed.child("gate", 0).rng(), 1usize << width), all.clone());
    for (j, &(n, m)) in calls.iter().enumerate() {
        let w = match hri_widths {
            Some(t) => n + t(n) + 1,
            None => 2 * n + 1,
        };
        if w > width {
            return Err(QsepError::Sizing(format!("an oracle call on n = {n} needs {w} wires, the circuit has {width}")));
        }
        let wires: Vec<usize> = (0..w).collect();
        match hri_widths {
            Some(_) => circ.push_hri(n, m, wires),
            None => circ.push_call(n, wires),
        };
        circ.push_gate(haar_unitary_with(&mut seed.child("gate", j as u64 + 1).rng(), 1usize << width), all.clone());
    }
    Ok(circ)
}

/// Toy PRU: per key, Haar gates drawn from `seed/key=<k>` interleaved with
/// swap-oracle calls on the listed sizes `n`.
pub fn toy_pru_candidate(lambda: usize, key_count: usize, ancilla_count: usize, call_ns: &[usize], seed: &SeedPath) -> Result<PruCandidate> {
    let keys: Vec<u64> = (0..key_count as u64).collect();
    let calls: Vec<(usize, u64)> = call_ns.iter().map(|&n| (n, 0)).collect();
    let circuits = keys
        .iter()
        .map(|&k| keyed_circuit(lambda + ancilla_count, &calls, None, &seed.child("key", k)))
        .collect::<Result<Vec<_>>>()?;
    PruCandidate::new(lambda, keys, circuits, ancilla_count)
}

/// Toy PRI with stretch `s` built the same way on `lambda + s + c` wires.
pub fn toy_pri_candidate(
    lambda: usize,
    key_count: usize,
    stretch: usize,
    ancilla_count: usize,
    call_ns: &[usize],
    seed: &SeedPath,
) -> Result<PriCandidate> {
    let keys: Vec<u64> = (0..key_count as u64).collect();
    let calls: Vec<(usize, u64)> = call_ns.iter().map(|&n| (n, 0)).collect();
    let circuits = keys
        .iter()
        .map(|&k| keyed_circuit(lambda + stretch + ancilla_count, &calls, None, &seed.child("key", k)))
        .collect::<Result<Vec<_>>>()?;
    PriCandidate::new(lambda, keys, circuits, stretch, ancilla_count)
}

/// Toy PRI relative to the isometry oracle: keyed Haar gates interleaved
/// with `HRI_{t,n,m}` calls, the classical index `m` taken from the key.
pub fn toy_hri_pri_candidate(
    lambda: usize,
    key_count: usize,
    stretch: usize,
    call_ns: &[usize],
    t_of: &dyn Fn(usize) -> usize,
    seed: &SeedPath,
) -> Result<PriCandidate> {
    let keys: Vec<u64> = (0..key_count as u64).collect();
    let circuits = keys
        .iter()
        .map(|&k| {
            let calls: Vec<(usize, u64)> = call_ns.iter().map(|&n| (n, if n == 0 { 0 } else { k % (1u64 << n.min(63)) })).collect();
            keyed_circuit(lambda + stretch, &calls, Some(t_of), &seed.child("key", k))
        })
        .collect::<Result<Vec<_>>>()?;
    PriCandidate::new(lambda, keys, circuits, stretch, 0)
}

/// Candidate whose keys all share one Haar unitary, with no oracle calls.
pub fn single_unitary_candidate(lambda: usize, key_count: usize, seed: &SeedPath) -> Result<PruCandidate> {
    let u = haar_unitary_with(&mut seed.rng(), 1usize << lambda);
    let all: Vec<usize> = (0..lambda).collect();
    let circuits = (0..key_count)
        .map(|_| {
            let mut c = OracleCircuit::new(lambda);
            c.push_gate(u.clone(), all.clone());
            c
        })
        .collect();
    PruCandidate::new(lambda, (0..key_count as u64).collect(), circuits, 0)
}

/// Amplitudes of `U |x>`.
pub fn column(u: &UnitaryMatrix, x: usize) -> Vec<C64> {
    u.matrix().column(x).iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;
    use crate::oracle::{HriOracleFamily, StretchFn, SwapOracleFamily};

    #[test]
    fn ell_is_ceiling_log() {
        assert_eq!(ell_for_keys(1), 0);
        assert_eq!(ell_for_keys(2), 1);
        assert_eq!(ell_for_keys(4), 2);
        assert_eq!(ell_for_keys(5), 3);
        assert_eq!(ell_for_keys(16), 4);
    }

    #[test]
    fn toy_pru_matches_basis_action() {
        let fam = SwapOracleFamily::new(SeedPath::new(1));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let cand = toy_pru_candidate(2, 4, 0, &[0, 0], &SeedPath::new(2)).unwrap();
        assert_eq!(cand.ell(), 2);
        assert_eq!(cand.query_count(), 2);
        for ki in 0..4 {
            let u = cand.unitary(ki, &o, &b).unwrap();
            assert!(unitarity_defect(u.matrix()) < 1e-10);
            for x in 0..4 {
                let out = cand.circuits[ki].evaluate(&o, &PureState::basis(2, x).unwrap(), &b).unwrap();
                let col = column(&u, x);
                for (a, z) in out.amplitudes().iter().zip(&col) {
                    assert!((a - z).norm() < 1e-12);
                }
            }
        }
        let rep = cand.validate_ancillas(&o, 3, &SeedPath::new(3), &b).unwrap();
        assert_eq!(rep.max_defect, 0.0);
    }

    #[test]
    fn ancilla_validator_flags_dirty_candidates() {
        let fam = SwapOracleFamily::new(SeedPath::new(4));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let cand = toy_pru_candidate(1, 2, 1, &[0], &SeedPath::new(5)).unwrap();
        let rep = cand.validate_ancillas(&o, 4, &SeedPath::new(6), &b).unwrap();
        assert!(rep.max_defect > 1e-3);
        assert_eq!(rep.trials, 8);
    }

    #[test]
    fn pri_isometry_shapes() {
        let fam = SwapOracleFamily::new(SeedPath::new(7));
        let o = Oracles::swap(&fam);
        let b = Budget::default();
        let cand = toy_pri_candidate(2, 4, 1, 0, &[1], &SeedPath::new(8)).unwrap();
        let v = cand.isometry(0, &o, &b).unwrap();
        assert_eq!((v.nrows(), v.ncols()), (8, 4));
        assert!((v.adjoint() * &v - ComplexMatrix::identity(4, 4)).norm() < 1e-10);
        let psi = PureState::basis(2, 3).unwrap();
        let rho = cand.apply(0, &psi, &o, &b).unwrap();
        let col = v.column(3).into_owned();
        assert!((rho - &col * col.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn hri_candidate_runs() {
        let fam = HriOracleFamily::new(SeedPath::new(9), StretchFn::identity());
        let o = Oracles::hri(&fam);
        let b = Budget::default();
        let t = |n: usize| n;
        let cand = toy_hri_pri_candidate(2, 4, 0, &[0, 0], &t, &SeedPath::new(10)).unwrap();
        assert_eq!(cand.query_count(), 2);
        let u = cand.unitary(1, &o, &b).unwrap();
        assert!(unitarity_defect(u.matrix()) < 1e-10);
    }
}
