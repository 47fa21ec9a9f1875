//! Separation oracles, the constructions built from them and circuits that
//! query them.

pub mod candidate;
pub mod circuit;
pub mod game;
pub mod hri;
pub mod prfsg;
pub mod swap;

pub use candidate::{
    ell_for_keys, single_unitary_candidate, toy_hri_pri_candidate, toy_pri_candidate, toy_pru_candidate, AncillaReport,
    PriCandidate, PruCandidate,
};
pub use circuit::{circuit_unitary, evaluate_circuit, rewrite_surrogate, OracleCircuit, OracleKey, Oracles, RewriteMode, Step};
pub use game::{concentration_bound, lipschitz_check, run_game, GameSummary, LipschitzSummary, ToyDistinguisher};
pub use hri::{hri_unitary, pri_eval, HriOracleFamily, StretchFn};
pub use prfsg::{prfsg_eval, SwapTable};
pub use swap::{apply_oracle_call, family_lookup, swap_unitary, t_theta_unitary, FamilyManifest, SwapOracleFamily};
