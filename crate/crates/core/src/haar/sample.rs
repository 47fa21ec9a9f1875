//! Haar-distributed unitaries and pure states.
//!
//! Unitaries come from the QR factorization of a complex Ginibre matrix
//! with the phases of `R`'s diagonal pushed into `Q`, which makes the
//! distribution exactly Haar. States are normalized complex Gaussian vectors.

use rand::Rng;

use super::seed::SeedPath;
use crate::error::{QsepError, Result};
use crate::linalg::random::{gaussian_matrix, gaussian_vector};
use crate::linalg::{cr, ComplexMatrix, PureState, UnitaryMatrix};

pub fn haar_unitary_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, d, d);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        let phase = if norm > 0.0 { rjj / cr(norm) } else { cr(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> UnitaryMatrix {
    UnitaryMatrix::trusted(haar_unitary_matrix(rng, d))
}

pub fn sample_haar_unitary(d: usize, seed: &SeedPath) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(QsepError::InvalidInput("Haar unitary needs d >= 1".into()));
    }
    Ok(haar_unitary_with(&mut seed.rng(), d))
}

pub fn haar_state_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PureState {
    let v = gaussian_vector(rng, d);
    let n = v.norm();
    PureState::trusted(v / cr(n))
}

/// Haar random pure state on `d` dimensions. Non-power-of-two `d` is
/// rejected because states live on qubit registers.
pub fn sample_haar_state(d: usize, seed: &SeedPath) -> Result<PureState> {
    if d == 0 || !d.is_power_of_two() {
        return Err(QsepError::InvalidInput(format!("Haar state needs a power-of-two d, got {d}")));
    }
    Ok(haar_state_with(&mut seed.rng(), d))
}
