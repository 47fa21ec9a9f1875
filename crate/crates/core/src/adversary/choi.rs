//! Keyed, surrogate and challenge Choi states.
//!
//! For a keyed family of `(lambda + s + c)`-qubit unitaries `U_k` the state
//! `E_k (F_k^{⊗ell} ⊗ id)(|Omega><Omega|)` is built with
//! `F_k(X) = Tr_c[U_k (X ⊗ |0^{s+c}><0^{s+c}|) U_k^dagger]`. Each key
//! contributes one pure vector per ancilla pattern `(a_1, ..., a_ell)`, so
//! the result is a [`LowRankState`] of rank at most `|K| 2^{c ell}`. The
//! layout is the output block (ell copies of `lambda + s` qubits) followed
//! by the reference block (ell copies of `lambda` qubits), matching the
//! Haar reference Choi states.

use rayon::prelude::*;

use super::Candidate;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::haar_choi_structured;
use crate::haar::PermSumOperator;
use crate::linalg::{cr, max_entangled_vector, tensor, ComplexMatrix, ComplexVector, LowRankState, UnitaryMatrix};
use crate::oracle::candidate::isometry_columns;
use crate::oracle::Oracles;

/// Register shape of a keyed family: input, stretch and work-ancilla qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChoiShape {
    pub lambda: usize,
    pub stretch: usize,
    pub ancillas: usize,
    pub ell: usize,
}

impl ChoiShape {
    /// Qubits of the Choi state: `(2 lambda + s) ell`.
    pub fn qubits(&self) -> usize {
        (2 * self.lambda + self.stretch) * self.ell
    }

    pub fn dim(&self) -> usize {
        1usize << self.qubits()
    }

    pub fn d_in(&self) -> usize {
        1usize << self.lambda
    }

    pub fn d_out(&self) -> usize {
        1usize << (self.lambda + self.stretch)
    }
}

/// Row-major flattening `sum_{o,x} M[o,x] |o>|x>`.
fn flatten(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_iterator(m.nrows() * m.ncols(), m.row_iter().flat_map(|r| r.iter().cloned().collect::<Vec<_>>()))
}

/// Pure Choi components of one unitary, one per ancilla pattern.
fn components(u: &UnitaryMatrix, shape: &ChoiShape) -> Result<Vec<ComplexVector>> {
    let width = shape.lambda + shape.stretch + shape.ancillas;
    if u.dim() != 1usize << width {
        return Err(QsepError::Dimension(format!("unitary has dimension {}, expected 2^{width}", u.dim())));
    }
    let v = isometry_columns(u.matrix(), shape.stretch + shape.ancillas);
    let step = 1usize << shape.ancillas;
    let slices: Vec<ComplexMatrix> = (0..step)
        .map(|a| v.select_rows((0..shape.d_out()).map(|o| o * step + a).collect::<Vec<_>>().iter()))
        .collect();
    let mut blocks = vec![ComplexMatrix::identity(1, 1)];
    for _ in 0..shape.ell {
        blocks = blocks.iter().flat_map(|b| slices.iter().map(move |s| tensor(b, s))).collect();
    }
    let norm = cr(1.0 / (shape.d_in().pow(shape.ell as u32) as f64).sqrt());
    Ok(blocks.iter().map(|b| flatten(b) * norm).collect())
}

/// `E_k (F_k^{⊗ell} ⊗ id)(|Omega><Omega|)` for the given per-key unitaries.
pub fn choi_from_unitaries(us: &[UnitaryMatrix], shape: &ChoiShape, budget: &Budget) -> Result<LowRankState> {
    if us.is_empty() {
        return Err(QsepError::InvalidInput("at least one key is required".into()));
    }
    budget.check_qubits("keyed Choi state", shape.qubits())?;
    let parts = us.par_iter().map(|u| components(u, shape)).collect::<Result<Vec<_>>>()?;
    let w = 1.0 / us.len() as f64;
    let vectors: Vec<ComplexVector> = parts.into_iter().flatten().collect();
    LowRankState::new(shape.dim(), vec![w; vectors.len()], vectors)
}

pub fn candidate_shape(cand: &Candidate, ell: usize) -> ChoiShape {
    ChoiShape { lambda: cand.lambda(), stretch: cand.stretch(), ancillas: cand.ancillas(), ell }
}

/// Keyed Choi state with every `U_k` materialized from its circuit.
pub fn keyed_choi(cand: &Candidate, oracles: &Oracles, ell: usize, budget: &Budget) -> Result<LowRankState> {
    let shape = candidate_shape(cand, ell);
    budget.check_qubits("keyed Choi state", shape.qubits())?;
    let us = cand.circuits().par_iter().map(|c| c.unitary(oracles, budget)).collect::<Result<Vec<_>>>()?;
    choi_from_unitaries(&us, &shape, budget)
}

/// Haar reference Choi state in structured form (Haar twirl for `s = 0`,
/// Haar isometry map otherwise).
pub fn haar_reference(shape: &ChoiShape, budget: &Budget) -> Result<PermSumOperator> {
    budget.check_qubits("Haar reference Choi state", shape.qubits())?;
    Ok(haar_choi_structured(shape.d_out(), shape.d_in(), shape.ell))
}

/// `|| (A ⊗ I)|Omega_in> - sqrt(out/in) (I ⊗ A^T)|Omega_out> ||` for a
/// `out x in` matrix `A`.
pub fn transpose_identity_residual(a: &ComplexMatrix) -> f64 {
    let (d_out, d_in) = a.shape();
    let om_in = max_entangled_vector(d_in);
    let om_out = max_entangled_vector(d_out);
    let mut lhs = ComplexVector::zeros(d_out * d_in);
    for o in 0..d_out {
        for x in 0..d_in {
            for y in 0..d_in {
                lhs[o * d_in + x] += a[(o, y)] * om_in[y * d_in + x];
            }
        }
    }
    let at = a.transpose();
    let scale = cr((d_out as f64 / d_in as f64).sqrt());
    let mut rhs = ComplexVector::zeros(d_out * d_in);
    for o in 0..d_out {
        for x in 0..d_in {
            for p in 0..d_out {
                rhs[o * d_in + x] += at[(x, p)] * om_out[o * d_out + p] * scale;
            }
        }
    }
    (lhs - rhs).norm()
}
