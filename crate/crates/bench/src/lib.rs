//! Fixed-seed inputs shared by the kernel benchmarks, so every run times the
//! same work.

use qsep_core::adversary::AttackConfig;
use qsep_core::blockenc::purify;
use qsep_core::haar::SeedPath;
use qsep_core::linalg::random::random_density;
use qsep_core::oracle::{toy_pru_candidate, PruCandidate, SwapOracleFamily};
use qsep_core::{DensityMatrix, UnitaryMatrix};

/// Root seed of every fixture.
pub const BENCH_SEED: u64 = 0x5eed;

pub fn seed(label: &str) -> SeedPath {
    SeedPath::new(BENCH_SEED).child(label, 0)
}

/// Random rank-`rank` state on `qubits` qubits.
pub fn density(qubits: usize, rank: usize) -> DensityMatrix {
    random_density(&mut seed("density").rng(), qubits, rank)
}

/// Purifier of a full-rank random state on `qubits` qubits.
pub fn purifier(qubits: usize) -> UnitaryMatrix {
    purify(&density(qubits, 1 << qubits))
}

/// Swap-oracle family and the three-query toy PRU candidate at `lambda = 2`,
/// four keys and no ancillas.
pub fn pru_fixture() -> (SwapOracleFamily, PruCandidate, AttackConfig) {
    let fam = SwapOracleFamily::new(seed("family"));
    let cand = toy_pru_candidate(2, 4, 0, &[0, 0, 0], &seed("candidate")).expect("toy candidate");
    let cfg = AttackConfig { p: 20, seed: BENCH_SEED, timing: false, ..Default::default() };
    (fam, cand, cfg)
}
