//! Low-rank positive operators and the quadratic-form interface shared by
//! dense, low-rank and permutation-structured operators.
//!
//! Keyed Choi states have rank at most `|K| * 2^{c ell}`, far below their
//! dimension, so they are stored as weighted vector lists and diagonalized
//! through their small Gram matrix.

use super::ops::hermitian_eigen;
use super::types::{cr, ComplexMatrix, ComplexVector, DensityMatrix};
use crate::error::{QsepError, Result};

/// Anything that can report `<v|X|v>` and `Tr[X]` on a fixed dimension.
pub trait QuadForm {
    fn dim(&self) -> usize;
    fn trace(&self) -> f64;
    /// Real part of `<v|X|v>`.
    fn expect(&self, v: &ComplexVector) -> f64;
}

impl QuadForm for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }
    fn trace(&self) -> f64 {
        DensityMatrix::trace(self)
    }
    fn expect(&self, v: &ComplexVector) -> f64 {
        DensityMatrix::expect(self, v)
    }
}

impl QuadForm for ComplexMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn trace(&self) -> f64 {
        ComplexMatrix::trace(self).re
    }
    fn expect(&self, v: &ComplexVector) -> f64 {
        v.dotc(&(self * v)).re
    }
}

/// `sum_i w_i |v_i><v_i|` with nonnegative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankState {
    dim: usize,
    weights: Vec<f64>,
    vectors: Vec<ComplexVector>,
}

/// Eigendecomposition restricted to the nonzero spectrum.
#[derive(Clone, Debug)]
pub struct LowRankEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values` (decreasing).
    pub vectors: ComplexMatrix,
}

impl LowRankState {
    pub fn new(dim: usize, weights: Vec<f64>, vectors: Vec<ComplexVector>) -> Result<Self> {
        if weights.len() != vectors.len() {
            return Err(QsepError::Dimension("weights and vectors differ in length".into()));
        }
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(QsepError::Dimension(format!("all vectors must have length {dim}")));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(QsepError::InvalidInput("weights must be finite and nonnegative".into()));
        }
        Ok(LowRankState { dim, weights, vectors })
    }

    pub fn pure(v: ComplexVector) -> Self {
        LowRankState { dim: v.len(), weights: vec![1.0], vectors: vec![v] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn terms(&self) -> usize {
        self.vectors.len()
    }

    /// Mixes states with the given probabilities.
    pub fn mixture(parts: &[(f64, LowRankState)]) -> Result<Self> {
        let dim = parts.first().map(|p| p.1.dim).ok_or_else(|| QsepError::InvalidInput("empty mixture".into()))?;
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for (p, s) in parts {
            if s.dim != dim {
                return Err(QsepError::Dimension("mixture parts differ in dimension".into()));
            }
            for (w, v) in s.weights.iter().zip(&s.vectors) {
                weights.push(p * w);
                vectors.push(v.clone());
            }
        }
        LowRankState::new(dim, weights, vectors)
    }

    /// Columns `sqrt(w_i) v_i`.
    fn factor(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.vectors.len());
        for (j, (w, v)) in self.weights.iter().zip(&self.vectors).enumerate() {
            m.set_column(j, &(v * cr(w.sqrt())));
        }
        m
    }

    /// Nonzero spectrum via the Gram matrix `F^dagger F` of the factor `F`.
    pub fn eigen(&self) -> LowRankEigen {
        let f = self.factor();
        let gram = f.adjoint() * &f;
        let eig = hermitian_eigen(&gram);
        let max = eig.values.first().cloned().unwrap_or(0.0).max(0.0);
        let cut = 1e-14 * max.max(1e-300);
        let keep: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > cut).collect();
        let mut vectors = ComplexMatrix::zeros(self.dim, keep.len());
        let mut values = Vec::with_capacity(keep.len());
        for (j, &i) in keep.iter().enumerate() {
            let lam = eig.values[i];
            let v = &f * eig.vectors.column(i) / cr(lam.sqrt());
            vectors.set_column(j, &v);
            values.push(lam);
        }
        LowRankEigen { values, vectors }
    }

    /// Number of eigenvalues above `tau * lambda_max`.
    pub fn rank(&self, tau: f64) -> usize {
        let e = self.eigen();
        let max = e.values.first().cloned().unwrap_or(0.0);
        e.values.iter().filter(|&&x| x > tau * max).count()
    }

    /// Orthonormal basis (as columns) of the eigenvectors above `tau * lambda_max`.
    pub fn support_basis(&self, tau: f64) -> ComplexMatrix {
        let e = self.eigen();
        let max = e.values.first().cloned().unwrap_or(0.0);
        let keep: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > tau * max).collect();
        e.vectors.select_columns(keep.iter())
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let f = self.factor();
        &f * f.adjoint()
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_dense())
    }

    /// `||self - other||_1` computed in an orthonormal basis of the joint span.
    pub fn trace_norm_diff(&self, other: &LowRankState) -> Result<f64> {
        if self.dim != other.dim {
            return Err(QsepError::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        let fa = self.factor();
        let fb = other.factor();
        let mut joint = ComplexMatrix::zeros(self.dim, fa.ncols() + fb.ncols());
        joint.columns_mut(0, fa.ncols()).copy_from(&fa);
        joint.columns_mut(fa.ncols(), fb.ncols()).copy_from(&fb);
        let basis = LowRankState::new(self.dim, vec![1.0; joint.ncols()], joint.column_iter().map(|c| c.into_owned()).collect())?
            .eigen()
            .vectors;
        let pa = basis.adjoint() * &fa;
        let pb = basis.adjoint() * &fb;
        let diff = &pa * pa.adjoint() - &pb * pb.adjoint();
        Ok(hermitian_eigen(&diff).values.iter().map(|x| x.abs()).sum())
    }
}

impl QuadForm for LowRankState {
    fn dim(&self) -> usize {
        self.dim
    }
    fn trace(&self) -> f64 {
        self.weights.iter().zip(&self.vectors).map(|(w, v)| w * v.norm_squared()).sum()
    }
    fn expect(&self, v: &ComplexVector) -> f64 {
        self.weights.iter().zip(&self.vectors).map(|(w, u)| w * u.dotc(v).norm_sqr()).sum()
    }
}

/// `Tr[Q X]` for the projector `Q` onto the columns of an orthonormal basis.
pub fn projected_mass<X: QuadForm + ?Sized>(basis: &ComplexMatrix, x: &X) -> f64 {
    basis.column_iter().map(|c| x.expect(&c.into_owned())).sum()
}
