//! Swap oracles `S_{n,m}` and their lazily sampled family.
//!
//! `S_{n,m}` exchanges `|0>|0^n>` and `|1>|psi_{n,m}>` and acts as the
//! identity elsewhere. Writing `a = |0,0^n>` and `b = |1,psi>`, which are
//! orthogonal because their first qubits differ,
//! `S = I - (a - b)(a - b)^dagger`, a rank-2 update that is applied without
//! ever forming the matrix.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::{haar_state_with, SeedPath};
use crate::linalg::sim::apply_local;
use crate::linalg::{ComplexMatrix, PureState, UnitaryMatrix, C64};

/// Applies `I - (a - b)(a - b)^dagger` to a local block laid out as
/// `[flag | psi register]` with `a = e_0` and `b = |1> ⊗ psi`.
pub fn swap_in_place(local: &mut [C64], psi: &[C64]) {
    let half = psi.len();
    debug_assert_eq!(local.len(), 2 * half);
    let mut overlap = C64::new(0.0, 0.0);
    for (j, p) in psi.iter().enumerate() {
        overlap += p.conj() * local[half + j];
    }
    let coef = local[0] - overlap;
    local[0] -= coef;
    for (j, p) in psi.iter().enumerate() {
        local[half + j] += coef * p;
    }
}

/// Dense `S` for an explicit `n`-qubit state.
pub fn swap_unitary(n: usize, psi: &PureState) -> Result<UnitaryMatrix> {
    if psi.qubits() != n {
        return Err(QsepError::Dimension(format!("psi has {} qubits, expected {n}", psi.qubits())));
    }
    let norm = psi.amplitudes().norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(QsepError::InvalidInput(format!("psi is not normalized (norm {norm})")));
    }
    let dim = 2usize << n;
    let mut m = ComplexMatrix::identity(dim, dim);
    let amps = psi.amplitudes().as_slice();
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for c in 0..dim {
        col.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        col[c] = C64::new(1.0, 0.0);
        swap_in_place(&mut col, amps);
        for (r, z) in col.iter().enumerate() {
            m[(r, c)] = *z;
        }
    }
    Ok(UnitaryMatrix::trusted(m))
}

/// `T_theta`: the swap unitary built from an explicit `2 lambda`-qubit state.
pub fn t_theta_unitary(theta: &PureState) -> Result<UnitaryMatrix> {
    swap_unitary(theta.qubits(), theta)
}

/// Reproducibility manifest of an oracle family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub kind: String,
    pub master_seed: u64,
    pub stretch: Option<super::hri::StretchFn>,
    pub dense_cutoff: usize,
}

type StateCache = RwLock<HashMap<(usize, u64), Arc<PureState>>>;

/// The family `{|psi_{n,m}>}` with entries drawn on first use from the
/// seed path `root/n=<n>/m#len=<n>/m=<m>`.
#[derive(Debug)]
pub struct SwapOracleFamily {
    root: SeedPath,
    dense_cutoff: usize,
    cache: StateCache,
}

impl Clone for SwapOracleFamily {
    fn clone(&self) -> Self {
        let cache = self.cache.read().expect("cache lock poisoned").clone();
        SwapOracleFamily { root: self.root.clone(), dense_cutoff: self.dense_cutoff, cache: RwLock::new(cache) }
    }
}

/// Packs a bit list (most significant first) into an integer.
pub fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Unpacks `len` bits, most significant first.
pub fn index_to_bits(index: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| (index >> (len - 1 - i)) & 1 == 1).collect()
}

impl SwapOracleFamily {
    pub fn new(root: SeedPath) -> Self {
        SwapOracleFamily { root, dense_cutoff: Budget::default().max_dense_oracle_n, cache: RwLock::new(HashMap::new()) }
    }

    pub fn with_dense_cutoff(root: SeedPath, dense_cutoff: usize) -> Self {
        SwapOracleFamily { root, dense_cutoff, cache: RwLock::new(HashMap::new()) }
    }

    pub fn root(&self) -> &SeedPath {
        &self.root
    }

    pub fn manifest(&self) -> FamilyManifest {
        FamilyManifest { kind: "swap".into(), master_seed: self.root.master, stretch: None, dense_cutoff: self.dense_cutoff }
    }

    pub fn from_manifest(m: &FamilyManifest) -> Result<Self> {
        if m.kind != "swap" {
            return Err(QsepError::Usage(format!("manifest kind {} is not a swap family", m.kind)));
        }
        Ok(SwapOracleFamily::with_dense_cutoff(SeedPath::new(m.master_seed), m.dense_cutoff))
    }

    fn entry_seed(&self, n: usize, m: u64) -> SeedPath {
        self.root.child("n", n as u64).child_bits("m", &index_to_bits(m, n))
    }

    /// `|psi_{n,m}>` with `m` given as an integer below `2^n`.
    pub fn lookup_index(&self, n: usize, m: u64) -> Result<Arc<PureState>> {
        if n < 64 && m >> n != 0 {
            return Err(QsepError::InvalidInput(format!("m = {m} has more than {n} bits")));
        }
        if let Some(s) = self.cache.read().expect("cache lock poisoned").get(&(n, m)) {
            return Ok(s.clone());
        }
        let state = Arc::new(haar_state_with(&mut self.entry_seed(n, m).rng(), 1usize << n));
        let mut w = self.cache.write().expect("cache lock poisoned");
        Ok(w.entry((n, m)).or_insert(state).clone())
    }

    pub fn cache_size(&self) -> usize {
        self.cache.read().expect("cache lock poisoned").len()
    }

    /// Dense `S_n = sum_m |m><m| ⊗ S_{n,m}` on `2n + 1` qubits.
    pub fn dense_oracle(&self, n: usize, budget: &Budget) -> Result<UnitaryMatrix> {
        budget.check_dense_oracle(n)?;
        let q = 2 * n + 1;
        let dim = 1usize << q;
        let wires: Vec<usize> = (0..q).collect();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut col = vec![C64::new(0.0, 0.0); dim];
            col[c] = C64::new(1.0, 0.0);
            self.apply_call(n, &mut col, q, &wires)?;
            for (r, z) in col.iter().enumerate() {
                m[(r, c)] = *z;
            }
        }
        Ok(UnitaryMatrix::trusted(m))
    }

    /// Applies `S_n` to `wires = [m register (n), flag, psi register (n)]`
    /// of a statevector. Blocks with zero amplitude never trigger a lookup.
    pub fn apply_call(&self, n: usize, state: &mut [C64], n_qubits: usize, wires: &[usize]) -> Result<()> {
        if wires.len() != 2 * n + 1 {
            return Err(QsepError::Dimension(format!(
                "swap oracle on n = {n} needs {} wires, got {}",
                2 * n + 1,
                wires.len()
            )));
        }
        let block = 2usize << n;
        let mut local_cache: HashMap<u64, Arc<PureState>> = HashMap::new();
        let mut failure = None;
        apply_local(state, n_qubits, wires, |local| {
            for (m, chunk) in local.chunks_mut(block).enumerate() {
                if chunk.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                let psi = match local_cache.get(&(m as u64)) {
                    Some(p) => p.clone(),
                    None => match self.lookup_index(n, m as u64) {
                        Ok(p) => {
                            local_cache.insert(m as u64, p.clone());
                            p
                        }
                        Err(e) => {
                            failure = Some(e);
                            return;
                        }
                    },
                };
                swap_in_place(chunk, psi.amplitudes().as_slice());
            }
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Applies one oracle call to a pure state. The daggered call is the same
/// map because every `S_{n,m}` is a Hermitian involution.
pub fn apply_oracle_call(
    fam: &SwapOracleFamily,
    n: usize,
    state: &PureState,
    wires: &[usize],
    _daggered: bool,
) -> Result<PureState> {
    let mut amps: Vec<C64> = state.amplitudes().iter().cloned().collect();
    fam.apply_call(n, &mut amps, state.qubits(), wires)?;
    Ok(PureState::trusted(nalgebra::DVector::from_vec(amps)))
}

/// `|psi_{n,m}>` for an explicit bit string.
pub fn family_lookup(fam: &SwapOracleFamily, n: usize, m: &[bool]) -> Result<PureState> {
    if m.len() != n {
        return Err(QsepError::InvalidInput(format!("m has {} bits, expected {n}", m.len())));
    }
    Ok((*fam.lookup_index(n, bits_to_index(m))?).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample_haar_state;
    use crate::linalg::{max_abs_diff, unitarity_defect};
    use nalgebra::DVector;

    #[test]
    fn swap_unitary_identities() {
        for n in 0..=4 {
            let psi = sample_haar_state(1 << n, &SeedPath::new(n as u64)).unwrap();
            let s = swap_unitary(n, &psi).unwrap();
            let m = s.matrix();
            assert!(max_abs_diff(m, &m.adjoint()) < 1e-12);
            assert!(unitarity_defect(m) < 1e-12);
            let dim = 2usize << n;
            assert!(max_abs_diff(&(m * m), &ComplexMatrix::identity(dim, dim)) < 1e-12);
            let col0 = m.column(0);
            for j in 0..(1 << n) {
                assert!((col0[(1 << n) + j] - psi.amplitudes()[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn swap_fixes_orthogonal_vectors() {
        let psi = sample_haar_state(8, &SeedPath::new(1)).unwrap();
        let s = swap_unitary(3, &psi).unwrap();
        let mut rng = SeedPath::new(2).rng();
        let mut v = crate::linalg::random::gaussian_vector(&mut rng, 16);
        v[0] = C64::new(0.0, 0.0);
        let mut b = DVector::zeros(16);
        for j in 0..8 {
            b[8 + j] = psi.amplitudes()[j];
        }
        let ov = b.dotc(&v);
        v -= &b * ov;
        assert!((s.matrix() * &v - &v).norm() < 1e-12);
    }

    #[test]
    fn swap_rejects_unnormalized_state() {
        let bad = PureState::trusted(DVector::from_element(2, C64::new(1.0, 0.0)));
        assert!(swap_unitary(1, &bad).is_err());
    }

    #[test]
    fn lookup_is_cached_and_lazy() {
        let fam = SwapOracleFamily::new(SeedPath::new(5));
        let a = family_lookup(&fam, 3, &[true, false, true]).unwrap();
        let b = family_lookup(&fam, 3, &[true, false, true]).unwrap();
        assert_eq!(a, b);
        assert_eq!(fam.cache_size(), 1);
        family_lookup(&fam, 2, &[true, false]).unwrap();
        assert_eq!(fam.cache_size(), 2);
        let fresh = SwapOracleFamily::new(SeedPath::new(5));
        assert_eq!(family_lookup(&fresh, 3, &[true, false, true]).unwrap(), a);
    }

    #[test]
    fn oracle_call_maps_flag_and_is_involutive() {
        let fam = SwapOracleFamily::new(SeedPath::new(9));
        let n = 2;
        let m = 0b10u64;
        // |m>|0>|0^n> on 5 qubits.
        let idx = (m as usize) << (n + 1);
        let input = PureState::basis(2 * n + 1, idx).unwrap();
        let wires: Vec<usize> = (0..5).collect();
        let out = apply_oracle_call(&fam, n, &input, &wires, false).unwrap();
        let psi = fam.lookup_index(n, m).unwrap();
        for j in 0..4 {
            let k = idx | (1 << n) | j;
            assert!((out.amplitudes()[k] - psi.amplitudes()[j]).norm() < 1e-12);
        }
        let back = apply_oracle_call(&fam, n, &out, &wires, true).unwrap();
        assert!((back.amplitudes() - input.amplitudes()).norm() < 1e-12);
        assert_eq!(fam.cache_size(), 1);
    }

    #[test]
    fn blockwise_call_matches_dense_oracle() {
        let fam = SwapOracleFamily::new(SeedPath::new(10));
        let b = Budget::default();
        for n in 0..=2 {
            let dense = fam.dense_oracle(n, &b).unwrap();
            let q = 2 * n + 1;
            // Embed in a larger register with permuted wires.
            let total = q + 1;
            let wires: Vec<usize> = (1..=q).rev().collect();
            let mut rng = SeedPath::new(11).rng();
            let v = crate::linalg::random::gaussian_vector(&mut rng, 1 << total);
            let mut fast: Vec<C64> = v.iter().cloned().collect();
            fam.apply_call(n, &mut fast, total, &wires).unwrap();
            let mut slow: Vec<C64> = v.iter().cloned().collect();
            crate::linalg::sim::apply_gate(&mut slow, total, dense.matrix(), &wires).unwrap();
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn manifest_round_trip_reproduces_entries() {
        let fam = SwapOracleFamily::new(SeedPath::new(21));
        let text = serde_json::to_string(&fam.manifest()).unwrap();
        let back = SwapOracleFamily::from_manifest(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(*fam.lookup_index(3, 5).unwrap(), *back.lookup_index(3, 5).unwrap());
    }
}
