//! Block encodings: purification of density matrices, the swap-test style
//! encoding of a purified density matrix, and unitary dilations of
//! contractions.
//!
//! The purified-density encoding acts on `[A (n), B (m), system (n)]` as
//! `V = (W^dagger ⊗ I)(SWAP_{A,system} ⊗ I_B)(W ⊗ I)`, where `W` prepares the
//! purification on `A B`. Its top-left block with `A B` in `|0>` is `rho`.
//! The circuit is kept in factored form so the block can be read off from
//! `2^n` column evaluations instead of a `2^{2n+m}`-dimensional product.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::SeedPath;
use crate::linalg::random::gaussian_matrix;
use crate::linalg::sim::apply_gate;
use crate::linalg::{
    cr, hermitian_eigen, operator_norm, qubits_of, ComplexMatrix, ComplexVector, DensityMatrix,
    UnitaryMatrix, C64,
};

#[derive(Clone, Debug)]
pub enum BlockUnitary {
    Dense(UnitaryMatrix),
    /// The factored encoding built from a purifier on `n + m` qubits.
    PurifiedDensity { purifier: UnitaryMatrix, n: usize, m: usize },
}

impl BlockUnitary {
    pub fn total_qubits(&self) -> usize {
        match self {
            BlockUnitary::Dense(u) => u.dim().trailing_zeros() as usize,
            BlockUnitary::PurifiedDensity { n, m, .. } => 2 * n + m,
        }
    }

    /// Applies the unitary to a full statevector.
    pub fn apply(&self, state: &mut [C64]) -> Result<()> {
        let q = self.total_qubits();
        match self {
            BlockUnitary::Dense(u) => {
                let wires: Vec<usize> = (0..q).collect();
                apply_gate(state, q, u.matrix(), &wires)
            }
            BlockUnitary::PurifiedDensity { purifier, n, m } => {
                let ab: Vec<usize> = (0..n + m).collect();
                apply_gate(state, q, purifier.matrix(), &ab)?;
                swap_registers(state, q, 0, n + m, *n);
                apply_gate(state, q, &purifier.matrix().adjoint(), &ab)
            }
        }
    }

    pub fn to_dense(&self, budget: &Budget) -> Result<UnitaryMatrix> {
        match self {
            BlockUnitary::Dense(u) => Ok(u.clone()),
            BlockUnitary::PurifiedDensity { .. } => {
                let q = self.total_qubits();
                budget.check_qubits("dense block encoding", q)?;
                let dim = 1usize << q;
                let mut out = ComplexMatrix::zeros(dim, dim);
                for c in 0..dim {
                    let mut col = vec![C64::new(0.0, 0.0); dim];
                    col[c] = C64::new(1.0, 0.0);
                    self.apply(&mut col)?;
                    out.set_column(c, &ComplexVector::from_vec(col));
                }
                Ok(UnitaryMatrix::trusted(out))
            }
        }
    }
}

/// Swaps the `len`-qubit registers starting at wires `first` and `second`.
fn swap_registers(state: &mut [C64], n_qubits: usize, first: usize, second: usize, len: usize) {
    for j in 0..len {
        let ba = 1usize << (n_qubits - 1 - (first + j));
        let bb = 1usize << (n_qubits - 1 - (second + j));
        for i in 0..state.len() {
            if i & ba != 0 && i & bb == 0 {
                state.swap(i, i ^ ba ^ bb);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub unitary: BlockUnitary,
    pub ancillas: usize,
    pub alpha: f64,
    pub eps: f64,
    pub block_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEncodingSummary {
    pub ancillas: usize,
    pub alpha: f64,
    pub eps: f64,
    pub block_dim: usize,
    pub total_qubits: usize,
}

impl BlockEncoding {
    pub fn summary(&self) -> BlockEncodingSummary {
        BlockEncodingSummary {
            ancillas: self.ancillas,
            alpha: self.alpha,
            eps: self.eps,
            block_dim: self.block_dim,
            total_qubits: self.unitary.total_qubits(),
        }
    }

    /// Trivial encoding of a unitary with no ancillas.
    pub fn of_unitary(u: UnitaryMatrix) -> Self {
        let block_dim = u.dim();
        BlockEncoding { unitary: BlockUnitary::Dense(u), ancillas: 0, alpha: 1.0, eps: 0.0, block_dim }
    }
}

/// Unitary `W` on two copies of the register with `W|0,0> = sum_i sqrt(p_i) |e_i>|i>`.
/// The remaining columns come from a Householder reflection.
pub fn purify(rho: &DensityMatrix) -> UnitaryMatrix {
    let d = rho.dim();
    let eig = hermitian_eigen(rho.matrix());
    let mut w = ComplexVector::zeros(d * d);
    for (i, &p) in eig.values.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let s = p.sqrt();
        for a in 0..d {
            w[a * d + i] += eig.vectors[(a, i)] * cr(s);
        }
    }
    let norm = w.norm();
    w /= cr(norm);
    householder_completion(&w)
}

/// Unitary whose first column is the unit vector `w`.
pub fn householder_completion(w: &ComplexVector) -> UnitaryMatrix {
    let dim = w.len();
    let w0 = w[0];
    let r = w0.norm();
    let alpha = if r > 1e-300 { w0 / cr(r) } else { cr(1.0) };
    if (1.0 - r).abs() < 1e-15 {
        return UnitaryMatrix::trusted(ComplexMatrix::identity(dim, dim) * alpha);
    }
    let mut v = w.clone();
    v[0] -= alpha;
    let vv = v.norm_squared();
    let h = ComplexMatrix::identity(dim, dim) - (&v * v.adjoint()) * cr(2.0 / vv);
    UnitaryMatrix::trusted(h * alpha)
}

/// `(1, 0, n + m)` encoding of `Tr_B[W|0><0|W^dagger]` for a purifier on `n + m` qubits.
pub fn block_encode_density(purifier: &UnitaryMatrix, n: usize, m: usize) -> Result<BlockEncoding> {
    let q = qubits_of(purifier.dim())?;
    if q != n + m {
        return Err(QsepError::Dimension(format!("purifier acts on {q} qubits, expected {}", n + m)));
    }
    Ok(BlockEncoding {
        unitary: BlockUnitary::PurifiedDensity { purifier: purifier.clone(), n, m },
        ancillas: n + m,
        alpha: 1.0,
        eps: 0.0,
        block_dim: 1usize << n,
    })
}

/// `alpha (<0^a| ⊗ I) V (|0^a> ⊗ I)`, with the ancillas as leading wires.
pub fn extract_block(be: &BlockEncoding) -> Result<ComplexMatrix> {
    let q = be.unitary.total_qubits();
    let dim = 1usize << q;
    let bd = be.block_dim;
    if bd << be.ancillas != dim {
        return Err(QsepError::Dimension("ancillas and block size do not fill the register".into()));
    }
    let mut out = ComplexMatrix::zeros(bd, bd);
    for c in 0..bd {
        let mut col = vec![C64::new(0.0, 0.0); dim];
        col[c] = C64::new(1.0, 0.0);
        be.unitary.apply(&mut col)?;
        for r in 0..bd {
            out[(r, c)] = col[r] * cr(be.alpha);
        }
    }
    Ok(out)
}

/// `||target - extract_block(be)||_inf`.
pub fn verify_block_encoding(be: &BlockEncoding, target: &ComplexMatrix) -> Result<f64> {
    let block = extract_block(be)?;
    if block.shape() != target.shape() {
        return Err(QsepError::Dimension("target and block differ in shape".into()));
    }
    Ok(operator_norm(&(target - block)))
}

/// One-ancilla dilation `[[M, sqrt(I - M M^dagger)], [sqrt(I - M^dagger M), -M^dagger]]`
/// of a contraction `M`.
pub fn dilation(m: &ComplexMatrix) -> Result<UnitaryMatrix> {
    let d = m.nrows();
    if !m.is_square() {
        return Err(QsepError::Dimension("dilation needs a square matrix".into()));
    }
    let norm = operator_norm(m);
    if norm > 1.0 + 1e-12 {
        return Err(QsepError::InvalidInput(format!("operator norm {norm} exceeds 1")));
    }
    // One SVD M = W S V^dag for all four blocks keeps the result an exact
    // product diag(W, V) [[S, C], [C, -S]] diag(V^dag, W^dag).
    let svd = m.clone().svd(true, true);
    let (w, v_adj) = (svd.u.expect("svd u"), svd.v_t.expect("svd v_t"));
    let v = v_adj.adjoint();
    let sig: Vec<f64> = svd.singular_values.iter().map(|x| x.min(1.0)).collect();
    let diag = |f: &dyn Fn(f64) -> f64| ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, sig.iter().map(|&x| cr(f(x)))));
    let s = diag(&|x| x);
    let c = diag(&|x| (1.0 - x * x).max(0.0).sqrt());
    let mut u = ComplexMatrix::zeros(2 * d, 2 * d);
    u.view_mut((0, 0), (d, d)).copy_from(&(&w * &s * &v_adj));
    u.view_mut((0, d), (d, d)).copy_from(&(&w * &c * w.adjoint()));
    u.view_mut((d, 0), (d, d)).copy_from(&(&v * &c * &v_adj));
    u.view_mut((d, d), (d, d)).copy_from(&(-(&v * &s * w.adjoint())));
    UnitaryMatrix::with_tolerance(u, 1e-8)
}

/// Dilation encoding of `M` with declared error `eps` against some target.
pub fn dilation_encoding(m: &ComplexMatrix, eps: f64) -> Result<BlockEncoding> {
    let d = m.nrows();
    Ok(BlockEncoding { unitary: BlockUnitary::Dense(dilation(m)?), ancillas: 1, alpha: 1.0, eps, block_dim: d })
}

/// A `(1, 2^{-p}, 1)` encoding of `rho`: the dilation of
/// `(1 - 2^{-p-1}) rho + 2^{-p-1} H` with `H` a unit-norm random Hermitian matrix.
pub fn perturbed_density_encoding(rho: &DensityMatrix, p: usize, seed: &SeedPath) -> Result<BlockEncoding> {
    let d = rho.dim();
    let g = gaussian_matrix(&mut seed.rng(), d, d);
    let h = (&g + g.adjoint()) * cr(0.5);
    let h = &h / cr(operator_norm(&h).max(1e-300));
    let half = 0.5f64.powi(p as i32 + 1);
    let m = rho.matrix() * cr(1.0 - half) + h * cr(half);
    dilation_encoding(&m, 2.0 * half)
}
