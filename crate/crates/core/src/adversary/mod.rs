//! The surrogate-circuit attacks on keyed PRU and PRI candidates.
//!
//! An attack learns every small oracle the candidate queries by process
//! tomography, rewrites each keyed circuit into an oracle-free surrogate,
//! forms the surrogate Choi state and runs the support-projection
//! distinguisher on the challenge Choi state.

pub mod attack;
pub mod choi;
pub mod distinguish;
pub mod surrogate;

pub use attack::{
    advantage_eta_sweep, advantage_exact, attack_pri, attack_pri_vs_hri, attack_pru, cutoff_for, haar_acceptance_of, keyed_state, AttackConfig, AttackKind, AttackParams, AttackReport, Challenge,
    ChallengeOutcome, HybridTerms, C_HYBRID,
};
pub use choi::{candidate_shape, choi_from_unitaries, haar_reference, keyed_choi, transpose_identity_residual, ChoiShape};
pub use distinguish::{
    distinguisher, distinguisher_eta, thresholds, BoundaryCrossing, BoundaryLog, DistinguisherPath, SupportDistinguisher,
    DENSE_BLOCK_MAX_QUBITS, MAX_POLY_DEGREE,
};
pub use surrogate::{build_surrogates, learn_oracles, small_keys, LearnedOracle, SurrogateFamily, SurrogateSummary};

use crate::oracle::{ell_for_keys, OracleCircuit, PriCandidate, PruCandidate};

/// Borrowed view of either candidate kind.
#[derive(Clone, Copy, Debug)]
pub enum Candidate<'a> {
    Pru(&'a PruCandidate),
    Pri(&'a PriCandidate),
}

impl<'a> Candidate<'a> {
    pub fn lambda(&self) -> usize {
        match self {
            Candidate::Pru(c) => c.lambda,
            Candidate::Pri(c) => c.lambda,
        }
    }

    pub fn stretch(&self) -> usize {
        match self {
            Candidate::Pru(_) => 0,
            Candidate::Pri(c) => c.stretch,
        }
    }

    pub fn ancillas(&self) -> usize {
        match self {
            Candidate::Pru(c) => c.ancilla_count,
            Candidate::Pri(c) => c.ancilla_count,
        }
    }

    pub fn circuits(&self) -> &'a [OracleCircuit] {
        match self {
            Candidate::Pru(c) => &c.circuits,
            Candidate::Pri(c) => &c.circuits,
        }
    }

    pub fn key_count(&self) -> usize {
        self.circuits().len()
    }

    /// Copies used by the attack: `max(1, ceil(log2 |K|))`.
    pub fn ell(&self) -> usize {
        ell_for_keys(self.key_count()).max(1)
    }

    /// Oracle calls per key (the maximum over keys).
    pub fn query_count(&self) -> usize {
        self.circuits().iter().map(|c| c.query_count()).max().unwrap_or(0)
    }
}
