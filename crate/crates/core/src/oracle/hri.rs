//! Isometry oracles `HRI_{t,n,m}` and their lazily sampled family.
//!
//! With `a_x = |0>|0^t>|x>` and `b_x = |1> U_{n,m}|0^t x>`, the oracle is
//! `I - sum_x (a_x - b_x)(a_x - b_x)^dagger`: it swaps every `a_x` with
//! `b_x` and fixes their orthogonal complement. Wires are ordered
//! `[flag, Y (t qubits), x (n qubits)]`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::swap::FamilyManifest;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::{haar_unitary_with, SeedPath};
use crate::linalg::sim::apply_local;
use crate::linalg::{unitarity_defect, ComplexMatrix, PureState, UnitaryMatrix, C64, UNITARY_TOL};

/// Stretch function `t(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum StretchFn {
    /// `t(n) = mul * n + add`.
    Affine { mul: usize, add: usize },
    /// `t(n) = ceil(scale * n^exponent)`.
    Power { exponent: f64, scale: f64 },
}

impl StretchFn {
    pub fn identity() -> Self {
        StretchFn::Affine { mul: 1, add: 0 }
    }

    pub fn eval(&self, n: usize) -> usize {
        match self {
            StretchFn::Affine { mul, add } => mul * n + add,
            StretchFn::Power { exponent, scale } => (scale * (n as f64).powf(*exponent) - 1e-12).ceil().max(0.0) as usize,
        }
    }

    /// Exponent `a` with `t(n) = Theta(n^a)`.
    pub fn growth_exponent(&self) -> f64 {
        match self {
            StretchFn::Affine { mul, .. } => {
                if *mul == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            StretchFn::Power { exponent, .. } => *exponent,
        }
    }

    pub fn id(&self) -> String {
        match self {
            StretchFn::Affine { mul, add } => format!("affine({mul},{add})"),
            StretchFn::Power { exponent, scale } => format!("power({exponent},{scale})"),
        }
    }
}

/// Applies the oracle to a local block `[flag | Y | x]` given the columns
/// `U(|0^t> ⊗ I_n)` as a `2^{t+n} x 2^n` matrix.
pub fn hri_in_place(local: &mut [C64], u0: &ComplexMatrix) {
    let half = u0.nrows();
    let nx = u0.ncols();
    debug_assert_eq!(local.len(), 2 * half);
    let mut coef = vec![C64::new(0.0, 0.0); nx];
    for (x, c) in coef.iter_mut().enumerate() {
        let mut ov = C64::new(0.0, 0.0);
        for r in 0..half {
            ov += u0[(r, x)].conj() * local[half + r];
        }
        *c = local[x] - ov;
    }
    for (x, c) in coef.iter().enumerate() {
        local[x] -= c;
    }
    for r in 0..half {
        let mut acc = C64::new(0.0, 0.0);
        for (x, c) in coef.iter().enumerate() {
            acc += u0[(r, x)] * c;
        }
        local[half + r] += acc;
    }
}

/// Columns of `u` whose leading `t` qubits are zero.
pub fn zero_ancilla_columns(u: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let cols: Vec<usize> = (0..(1usize << n)).collect();
    u.select_columns(cols.iter())
}

/// Dense `HRI` for an explicit `(n + t)`-qubit unitary.
pub fn hri_unitary(t: usize, n: usize, u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    if u.dim() != 1usize << (n + t) {
        return Err(QsepError::Dimension(format!("U has dimension {}, expected 2^{}", u.dim(), n + t)));
    }
    let defect = unitarity_defect(u.matrix());
    if defect > UNITARY_TOL {
        return Err(QsepError::InvalidInput(format!("U is not unitary (defect {defect:.3e})")));
    }
    let u0 = zero_ancilla_columns(u.matrix(), n);
    let dim = 2usize << (n + t);
    let mut m = ComplexMatrix::zeros(dim, dim);
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for c in 0..dim {
        col.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        col[c] = C64::new(1.0, 0.0);
        hri_in_place(&mut col, &u0);
        for (r, z) in col.iter().enumerate() {
            m[(r, c)] = *z;
        }
    }
    Ok(UnitaryMatrix::trusted(m))
}

type UnitaryCache = RwLock<HashMap<(usize, u64), Arc<UnitaryMatrix>>>;

/// The family `{U_{n,m}}` of Haar unitaries on `n + t(n)` qubits, drawn on
/// first use from the seed path `root/n=<n>/m#len=<n>/m=<m>`.
#[derive(Debug)]
pub struct HriOracleFamily {
    root: SeedPath,
    stretch: StretchFn,
    dense_cutoff: usize,
    cache: UnitaryCache,
}

impl Clone for HriOracleFamily {
    fn clone(&self) -> Self {
        let cache = self.cache.read().expect("cache lock poisoned").clone();
        HriOracleFamily {
            root: self.root.clone(),
            stretch: self.stretch.clone(),
            dense_cutoff: self.dense_cutoff,
            cache: RwLock::new(cache),
        }
    }
}

impl HriOracleFamily {
    pub fn new(root: SeedPath, stretch: StretchFn) -> Self {
        HriOracleFamily { root, stretch, dense_cutoff: Budget::default().max_dense_oracle_n, cache: RwLock::new(HashMap::new()) }
    }

    pub fn stretch(&self) -> &StretchFn {
        &self.stretch
    }

    pub fn t(&self, n: usize) -> usize {
        self.stretch.eval(n)
    }

    pub fn manifest(&self) -> FamilyManifest {
        FamilyManifest {
            kind: "hri".into(),
            master_seed: self.root.master,
            stretch: Some(self.stretch.clone()),
            dense_cutoff: self.dense_cutoff,
        }
    }

    pub fn from_manifest(m: &FamilyManifest) -> Result<Self> {
        let stretch = match (&*m.kind, &m.stretch) {
            ("hri", Some(s)) => s.clone(),
            _ => return Err(QsepError::Usage("manifest does not describe an isometry-oracle family".into())),
        };
        let mut fam = HriOracleFamily::new(SeedPath::new(m.master_seed), stretch);
        fam.dense_cutoff = m.dense_cutoff;
        Ok(fam)
    }

    pub fn lookup(&self, n: usize, m: u64, budget: &Budget) -> Result<Arc<UnitaryMatrix>> {
        if n < 64 && m >> n != 0 {
            return Err(QsepError::InvalidInput(format!("m = {m} has more than {n} bits")));
        }
        if let Some(u) = self.cache.read().expect("cache lock poisoned").get(&(n, m)) {
            return Ok(u.clone());
        }
        let q = n + self.t(n);
        budget.check_qubits("isometry oracle unitary", q)?;
        let seed = self.root.child("n", n as u64).child_bits("m", &super::swap::index_to_bits(m, n));
        let u = Arc::new(haar_unitary_with(&mut seed.rng(), 1usize << q));
        let mut w = self.cache.write().expect("cache lock poisoned");
        Ok(w.entry((n, m)).or_insert(u).clone())
    }

    pub fn cache_size(&self) -> usize {
        self.cache.read().expect("cache lock poisoned").len()
    }

    pub fn dense_oracle(&self, n: usize, m: u64, budget: &Budget) -> Result<UnitaryMatrix> {
        let t = self.t(n);
        budget.check_qubits("dense isometry oracle", n + t + 1)?;
        let u = self.lookup(n, m, budget)?;
        hri_unitary(t, n, &u)
    }

    /// Applies `HRI_{t,n,m}` to `wires = [flag, Y, x]` of a statevector.
    pub fn apply_call(&self, n: usize, m: u64, state: &mut [C64], n_qubits: usize, wires: &[usize], budget: &Budget) -> Result<()> {
        let t = self.t(n);
        if wires.len() != n + t + 1 {
            return Err(QsepError::Dimension(format!(
                "isometry oracle on n = {n} needs {} wires, got {}",
                n + t + 1,
                wires.len()
            )));
        }
        let u = self.lookup(n, m, budget)?;
        let u0 = zero_ancilla_columns(u.matrix(), n);
        apply_local(state, n_qubits, wires, |local| hri_in_place(local, &u0))
    }
}

/// `U_{lambda,k}(|0^t>|psi>)` realized with one oracle query on
/// `|0>|0^t>|psi>`, dropping the flag qubit, which ends in `|1>`.
pub fn pri_eval(fam: &HriOracleFamily, lambda: usize, k: u64, psi: &PureState, budget: &Budget) -> Result<PureState> {
    if psi.qubits() != lambda {
        return Err(QsepError::Dimension(format!("input has {} qubits, expected {lambda}", psi.qubits())));
    }
    let t = fam.t(lambda);
    let q = lambda + t + 1;
    let mut state = vec![C64::new(0.0, 0.0); 1usize << q];
    for (x, a) in psi.amplitudes().iter().enumerate() {
        state[x] = *a;
    }
    let wires: Vec<usize> = (0..q).collect();
    fam.apply_call(lambda, k, &mut state, q, &wires, budget)?;
    let half = 1usize << (lambda + t);
    let flag_zero: f64 = state[..half].iter().map(|z| z.norm_sqr()).sum();
    if flag_zero > 1e-12 {
        return Err(QsepError::Numerical(format!("flag qubit left in |0> with weight {flag_zero:.3e}")));
    }
    Ok(PureState::trusted(nalgebra::DVector::from_column_slice(&state[half..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn hri_action_symmetry_and_trace() {
        let b = Budget::default();
        for (n, t) in [(0usize, 0usize), (1, 1), (2, 1), (1, 2), (2, 2)] {
            let stretch = StretchFn::Affine { mul: 0, add: t };
            let fam = HriOracleFamily::new(SeedPath::new(3), stretch);
            let u = fam.lookup(n, 0, &b).unwrap();
            let h = hri_unitary(t, n, &u).unwrap();
            let m = h.matrix();
            assert!(max_abs_diff(m, &m.adjoint()) < 1e-12);
            assert!(unitarity_defect(m) < 1e-10);
            for x in 0..(1usize << n) {
                let col = m.column(x);
                let half = 1usize << (n + t);
                for r in 0..half {
                    assert!((col[half + r] - u.matrix()[(r, x)]).norm() < 1e-12);
                    assert!(col[r].norm() < 1e-12);
                }
            }
            let expected = (1u64 << (n + t + 1)) as f64 - (1u64 << (n + 1)) as f64;
            assert!((m.trace().re - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn hri_rejects_non_unitary() {
        let bad = UnitaryMatrix::trusted(ComplexMatrix::identity(4, 4) * C64::new(2.0, 0.0));
        assert!(hri_unitary(1, 1, &bad).is_err());
    }

    #[test]
    fn blockwise_call_matches_dense() {
        let b = Budget::default();
        let fam = HriOracleFamily::new(SeedPath::new(4), StretchFn::identity());
        let n = 1;
        let dense = fam.dense_oracle(n, 1, &b).unwrap();
        let wires = [3usize, 0, 2];
        let mut rng = SeedPath::new(5).rng();
        let v = crate::linalg::random::gaussian_vector(&mut rng, 16);
        let mut fast: Vec<C64> = v.iter().cloned().collect();
        fam.apply_call(n, 1, &mut fast, 4, &wires, &b).unwrap();
        let mut slow: Vec<C64> = v.iter().cloned().collect();
        crate::linalg::sim::apply_gate(&mut slow, 4, dense.matrix(), &wires).unwrap();
        for (x, y) in fast.iter().zip(&slow) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn pri_eval_matches_direct_isometry() {
        let b = Budget::default();
        let fam = HriOracleFamily::new(SeedPath::new(6), StretchFn::identity());
        let lambda = 2;
        let mut rng = SeedPath::new(7).rng();
        let a = crate::haar::haar_state_with(&mut rng, 4);
        let c = crate::haar::haar_state_with(&mut rng, 4);
        let out_a = pri_eval(&fam, lambda, 3, &a, &b).unwrap();
        let out_c = pri_eval(&fam, lambda, 3, &c, &b).unwrap();
        let u = fam.lookup(lambda, 3, &b).unwrap();
        let direct = zero_ancilla_columns(u.matrix(), lambda) * a.amplitudes();
        assert!((out_a.amplitudes() - direct).norm() < 1e-12);
        assert!((out_a.inner(&out_c) - a.inner(&c)).norm() < 1e-12);
    }

    #[test]
    fn stretch_functions() {
        assert_eq!(StretchFn::identity().eval(5), 5);
        assert_eq!(StretchFn::Power { exponent: 0.5, scale: 1.0 }.eval(5), 3);
        assert_eq!(StretchFn::Power { exponent: 2.0, scale: 1.0 }.eval(3), 9);
        let s = serde_json::to_string(&StretchFn::identity()).unwrap();
        assert_eq!(serde_json::from_str::<StretchFn>(&s).unwrap(), StretchFn::identity());
    }
}
