//! Choi states of the Haar twirl and of the Haar isometry map, and the
//! symmetric moment states they are compared against.
//!
//! All of these live in the span of `R_pi ⊗ R_sigma` on a register made of
//! `ell` copies of dimension `d_a` (block A) followed by `ell` copies of
//! dimension `d_b` (block A'). [`PermSumOperator`] keeps them in that
//! structured form, so quadratic forms and exact trace norms are available
//! far beyond the sizes where dense matrices are practical.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::twirl::twirl_exact_matrix;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::linalg::{
    all_perms, binomial, compose, cr, cycle_count, factorial, inverse, max_entangled_vector, perm_rank, permute_table,
    hermitian_fn, sqrt_psd, ComplexMatrix, ComplexVector, DensityMatrix, Perm, QuadForm, C64,
};

/// `sum_t coef_t R_{pi_t}^{(d_a)} ⊗ R_{sigma_t}^{(d_b)}` on `ell + ell` copies.
#[derive(Clone, Debug, PartialEq)]
pub struct PermSumOperator {
    pub ell: usize,
    pub d_a: usize,
    pub d_b: usize,
    terms: BTreeMap<(Perm, Perm), f64>,
}

impl PermSumOperator {
    pub fn zero(ell: usize, d_a: usize, d_b: usize) -> Self {
        PermSumOperator { ell, d_a, d_b, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, coef: f64, pi: Perm, sigma: Perm) {
        *self.terms.entry((pi, sigma)).or_insert(0.0) += coef;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Perm, &Perm, f64)> {
        self.terms.iter().map(|((p, s), &c)| (p, s, c))
    }

    pub fn block_dims(&self) -> (usize, usize) {
        (self.d_a.pow(self.ell as u32), self.d_b.pow(self.ell as u32))
    }

    fn same_shape(&self, other: &PermSumOperator) -> Result<()> {
        if (self.ell, self.d_a, self.d_b) != (other.ell, other.d_a, other.d_b) {
            return Err(QsepError::Dimension("permutation sums have different shapes".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> PermSumOperator {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= s;
        }
        out
    }

    /// `self - other`.
    pub fn sub(&self, other: &PermSumOperator) -> Result<PermSumOperator> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for ((p, s), c) in &other.terms {
            out.add_term(-c, p.clone(), s.clone());
        }
        Ok(out)
    }

    /// Applies the operator to a vector on the A-then-A' layout.
    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        let (da, db) = self.block_dims();
        let mut out = ComplexVector::zeros(da * db);
        for ((p, s), &coef) in &self.terms {
            let ta = permute_table(p, self.d_a);
            let tb = permute_table(s, self.d_b);
            let c = cr(coef);
            for (a, &pa) in ta.iter().enumerate() {
                for (b, &pb) in tb.iter().enumerate() {
                    out[pa * db + pb] += c * v[a * db + b];
                }
            }
        }
        out
    }

    pub fn to_dense(&self, budget: &Budget) -> Result<ComplexMatrix> {
        let (da, db) = self.block_dims();
        let dim = da * db;
        if dim > 1usize << budget.max_total_qubits {
            return Err(QsepError::Sizing(format!("dense permutation sum of dimension {dim} exceeds budget")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        for ((p, s), &coef) in &self.terms {
            let ta = permute_table(p, self.d_a);
            let tb = permute_table(s, self.d_b);
            for (a, &pa) in ta.iter().enumerate() {
                for (b, &pb) in tb.iter().enumerate() {
                    m[(pa * db + pb, a * db + b)] += cr(coef);
                }
            }
        }
        Ok(m)
    }

    /// Character of the defining representation at `(pi, sigma)`.
    fn character(&self, pi: &[usize], sigma: &[usize]) -> f64 {
        (self.d_a as f64).powi(cycle_count(pi) as i32) * (self.d_b as f64).powi(cycle_count(sigma) as i32)
    }

    /// Exact trace norm.
    ///
    /// The operator is the image `rho(x)` of a group-algebra element `x` of
    /// `S_ell x S_ell`. Functional calculus commutes with the representation,
    /// so `|rho(x)| = rho(|x|)`. The element `|x|` is computed in the
    /// faithful left-regular representation and the trace is read off with
    /// the character.
    pub fn trace_norm(&self) -> f64 {
        let perms = all_perms(self.ell);
        let k = perms.len();
        let g = k * k;
        let mut l = ComplexMatrix::zeros(g, g);
        for ((p, s), &coef) in &self.terms {
            for (jp, q) in perms.iter().enumerate() {
                for (js, r) in perms.iter().enumerate() {
                    let row = perm_rank(&compose(p, q)) * k + perm_rank(&compose(s, r));
                    l[(row, jp * k + js)] += cr(coef);
                }
            }
        }
        let abs = if crate::linalg::hermitian_defect(&l) <= 1e-14 * (1.0 + crate::linalg::frobenius_norm(&l)) {
            hermitian_fn(&l, f64::abs)
        } else {
            sqrt_psd(&(l.adjoint() * &l))
        };
        let mut total = 0.0;
        for (jp, q) in perms.iter().enumerate() {
            for (js, r) in perms.iter().enumerate() {
                total += abs[(jp * k + js, 0)].re * self.character(q, r);
            }
        }
        total
    }

    /// Hermitian-conjugate symmetry check `coef(pi, sigma) = coef(pi^-1, sigma^-1)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|((p, s), c)| {
            let back = self.terms.get(&(inverse(p), inverse(s))).cloned().unwrap_or(0.0);
            (back - c).abs() <= tol
        })
    }
}

impl QuadForm for PermSumOperator {
    fn dim(&self) -> usize {
        let (da, db) = self.block_dims();
        da * db
    }
    fn trace(&self) -> f64 {
        self.terms.iter().map(|((p, s), c)| c * self.character(p, s)).sum()
    }
    fn expect(&self, v: &ComplexVector) -> f64 {
        let w = self.apply(v);
        v.dotc(&w).re
    }
}

/// `(1/d_in) sum_{pi,sigma} W[pi,sigma](d_out) R_pi^{(d_out)} ⊗ R_sigma^{(d_in)}`:
/// the Choi state of the Haar twirl (`d_out = d_in`) or of the Haar
/// isometry map (`d_out = d_in * 2^s`), in closed form.
pub fn haar_choi_structured(d_out: usize, d_in: usize, ell: usize) -> PermSumOperator {
    let perms = all_perms(ell);
    let w: DMatrix<f64> = crate::linalg::weingarten_matrix(d_out as f64, ell);
    let mut op = PermSumOperator::zero(ell, d_out, d_in);
    let norm = 1.0 / (d_in as f64).powi(ell as i32);
    for (i, p) in perms.iter().enumerate() {
        for (j, s) in perms.iter().enumerate() {
            op.add_term(norm * w[(i, j)], p.clone(), s.clone());
        }
    }
    op
}

/// The symmetric moment state `Pi_sym / binom(d_a d_b + ell - 1, ell)` over
/// the paired registers `(A_i A'_i)`, written in the A-then-A' layout.
pub fn state_moment_structured(d_a: usize, d_b: usize, ell: usize) -> PermSumOperator {
    let mut op = PermSumOperator::zero(ell, d_a, d_b);
    let norm = 1.0 / (factorial(ell) as f64 * binomial((d_a * d_b + ell - 1) as u64, ell as u64));
    for p in all_perms(ell) {
        op.add_term(norm, p.clone(), p);
    }
    op
}

/// The permutation approximation of the twirl applied to `|Omega><Omega|`:
/// `(1/d^ell) sum_pi R_pi ⊗ (1/d^ell) R_pi`.
pub fn permutation_approx_choi_structured(d: usize, ell: usize) -> PermSumOperator {
    let mut op = PermSumOperator::zero(ell, d, d);
    let norm = 1.0 / (d as f64).powi(2 * ell as i32);
    for p in all_perms(ell) {
        op.add_term(norm, p.clone(), p);
    }
    op
}

/// Reorders a vector from the paired layout `(A_1 A'_1)...(A_ell A'_ell)`
/// to the block layout `A_1..A_ell A'_1..A'_ell`.
pub fn pairs_to_blocks(v: &[C64], d_a: usize, d_b: usize, ell: usize) -> Vec<C64> {
    let db_all = d_b.pow(ell as u32);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (idx, &amp) in v.iter().enumerate() {
        let mut rest = idx;
        let mut a_digits = vec![0usize; ell];
        let mut b_digits = vec![0usize; ell];
        for i in (0..ell).rev() {
            b_digits[i] = rest % d_b;
            rest /= d_b;
            a_digits[i] = rest % d_a;
            rest /= d_a;
        }
        let a = a_digits.iter().fold(0, |acc, &x| acc * d_a + x);
        let b = b_digits.iter().fold(0, |acc, &x| acc * d_b + x);
        out[a * db_all + b] = amp;
    }
    out
}

fn check_choi_budget(qubits: usize, budget: &Budget) -> Result<()> {
    budget.check_qubits("Haar Choi state", qubits)
}

/// Choi state of the `ell`-fold Haar twirl on `lambda` qubits, obtained by
/// twirling the first half of `|Omega_{2^{lambda ell}}>`.
pub fn haar_choi(lambda: usize, ell: usize, budget: &Budget) -> Result<DensityMatrix> {
    haar_isometry_choi(lambda, 0, ell, budget)
}

/// Choi state of the Haar isometry map `lambda -> lambda + s` on `ell`
/// copies: `|0^s>` ancillas are appended to every input copy and the joint
/// register is twirled over `U(2^{lambda+s})`.
pub fn haar_isometry_choi(lambda: usize, s: usize, ell: usize, budget: &Budget) -> Result<DensityMatrix> {
    let d_in = 1usize << lambda;
    let d_out = 1usize << (lambda + s);
    check_choi_budget((2 * lambda + s) * ell, budget)?;
    budget.check_twirl(d_out, ell)?;
    let din_all = d_in.pow(ell as u32);
    let dout_all = d_out.pow(ell as u32);
    // Embed |Omega> with ancillas: input copy digit x becomes x * 2^s.
    let omega = max_entangled_vector(din_all);
    let mut padded = ComplexVector::zeros(dout_all * din_all);
    for x in 0..din_all {
        let mut digits = vec![0usize; ell];
        let mut rest = x;
        for i in (0..ell).rev() {
            digits[i] = rest % d_in;
            rest /= d_in;
        }
        let xo = digits.iter().fold(0, |acc, &dg| acc * d_out + (dg << s));
        padded[xo * din_all + x] = omega[x * din_all + x];
    }
    let proj = &padded * padded.adjoint();
    let m = twirl_exact_matrix(&proj, d_out, ell, budget)?;
    Ok(DensityMatrix::trusted((&m + m.adjoint()) * cr(0.5)))
}
