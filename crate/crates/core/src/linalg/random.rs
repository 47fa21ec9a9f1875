//! Complex Gaussian draws shared by the samplers and the property tests.

use rand::Rng;
use rand_distr::StandardNormal;

use super::types::{cr, ComplexMatrix, ComplexVector, DensityMatrix, C64};

/// Standard complex Gaussian `(x + iy)/sqrt(2)`.
pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    C64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> ComplexVector {
    ComplexVector::from_fn(len, |_, _| gaussian_c64(rng))
}

/// Ginibre matrix drawn in row-major order.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let v = gaussian_vector(rng, rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Random density matrix `G G^dagger / Tr` with `G` of shape `d x rank`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, qubits: usize, rank: usize) -> DensityMatrix {
    let d = 1usize << qubits;
    let g = gaussian_matrix(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m / cr(tr);
    DensityMatrix::trusted((&m + m.adjoint()) * cr(0.5))
}
