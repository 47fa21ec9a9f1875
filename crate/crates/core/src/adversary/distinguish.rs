//! The support-projection distinguisher and the powerful-subroutine
//! boundary.
//!
//! The distinguisher block-encodes the surrogate Choi state `rho`, then runs
//! singular-value discrimination with `a = 2^{-3n}`, `b = 2^{-2n}` and
//! `eta = 2^{-lambda}` (capped at `1/4`). Every classical diagonalization
//! it needs goes through [`boundary_svd`] or [`boundary_spectrum`], which
//! record a [`BoundaryCrossing`]. Up to [`DENSE_BLOCK_MAX_QUBITS`] qubits the
//! block is extracted from an explicit purified-density block encoding;
//! above that the block is known to equal `rho`, so its singular system is
//! read from the low-rank spectrum of `rho` directly.

use serde::{Deserialize, Serialize};

use crate::blockenc::discriminate::sample_bit;
use crate::blockenc::{
    block_encode_density, degree_bound, extract_block, purify, right_singular_system, Discrimination,
    Discriminator, SvdBackend,
};
use crate::error::{QsepError, Result};
use crate::haar::SeedPath;
use crate::linalg::{ComplexMatrix, DensityMatrix, LowRankState, QuadForm};

/// Largest state (in qubits) that is block-encoded explicitly.
pub const DENSE_BLOCK_MAX_QUBITS: usize = 4;
/// Largest threshold-polynomial degree the polynomial backend will build.
pub const MAX_POLY_DEGREE: usize = 8192;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCrossing {
    pub operation: String,
    pub dimension: usize,
}

/// Every use of classical linear algebra standing in for the
/// `UnitaryPSPACE` oracle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryLog {
    pub crossings: Vec<BoundaryCrossing>,
}

impl BoundaryLog {
    pub fn cross(&mut self, operation: &str, dimension: usize) {
        self.crossings.push(BoundaryCrossing { operation: operation.to_string(), dimension });
    }
}

/// Right singular system of an extracted block.
pub fn boundary_svd(block: &ComplexMatrix, log: &mut BoundaryLog) -> (Vec<f64>, ComplexMatrix) {
    log.cross("singular value decomposition of block", block.nrows());
    right_singular_system(block)
}

/// Nonzero spectrum of a low-rank PSD operator (its singular system).
pub fn boundary_spectrum(rho: &LowRankState, log: &mut BoundaryLog) -> (Vec<f64>, ComplexMatrix) {
    log.cross("spectral decomposition of low-rank state", rho.dim());
    let e = rho.eigen();
    (e.values, e.vectors)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistinguisherPath {
    DenseBlock,
    LowRankSpectrum,
}

/// Thresholds `(a, b) = (2^{-3n}, 2^{-2n})`.
pub fn thresholds(n_qubits: usize) -> (f64, f64) {
    (0.5f64.powi(3 * n_qubits as i32), 0.5f64.powi(2 * n_qubits as i32))
}

/// `2^{-lambda}`, capped at `1/4` so that the threshold polynomial exists.
pub fn distinguisher_eta(lambda: usize) -> f64 {
    0.5f64.powi(lambda as i32).min(0.25)
}

#[derive(Clone, Debug)]
pub struct SupportDistinguisher {
    pub n_qubits: usize,
    pub disc: Discriminator,
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
    pub path: DistinguisherPath,
}

impl SupportDistinguisher {
    pub fn new(rho: &LowRankState, n_qubits: usize, lambda: usize, backend: SvdBackend, log: &mut BoundaryLog) -> Result<Self> {
        Self::with_eta(rho, n_qubits, distinguisher_eta(lambda), backend, log)
    }

    pub fn with_eta(rho: &LowRankState, n_qubits: usize, eta: f64, backend: SvdBackend, log: &mut BoundaryLog) -> Result<Self> {
        if rho.dim() != 1usize << n_qubits {
            return Err(QsepError::Dimension(format!("state has dimension {}, expected 2^{n_qubits}", rho.dim())));
        }
        let (a, b) = thresholds(n_qubits);
        if backend == SvdBackend::Poly && degree_bound(a, b, eta) > MAX_POLY_DEGREE {
            return Err(QsepError::Sizing(format!(
                "threshold polynomial for {n_qubits} qubits needs degree up to {}, limit is {MAX_POLY_DEGREE}",
                degree_bound(a, b, eta)
            )));
        }
        let disc = Discriminator::new(a, b, eta, backend)?;
        let (values, vectors, path) = if n_qubits <= DENSE_BLOCK_MAX_QUBITS {
            let dense = DensityMatrix::new(rho.to_dense())?;
            let be = block_encode_density(&purify(&dense), n_qubits, n_qubits)?;
            let block = extract_block(&be)?;
            let (v, w) = boundary_svd(&block, log);
            (v, w, DistinguisherPath::DenseBlock)
        } else {
            let (v, w) = boundary_spectrum(rho, log);
            (v, w, DistinguisherPath::LowRankSpectrum)
        };
        Ok(SupportDistinguisher { n_qubits, disc, values, vectors, path })
    }

    /// Exact acceptance probability on input `xi`.
    pub fn acceptance<X: QuadForm + ?Sized>(&self, xi: &X) -> Result<f64> {
        if xi.dim() != self.vectors.nrows() {
            return Err(QsepError::Dimension(format!("input has dimension {}, expected {}", xi.dim(), self.vectors.nrows())));
        }
        Ok(self.disc.acceptance(&self.values, &self.vectors, xi))
    }

    /// Acceptance probability and one sampled outcome.
    pub fn run<X: QuadForm + ?Sized>(&self, xi: &X, seed: &SeedPath) -> Result<Discrimination> {
        let acceptance = self.acceptance(xi)?;
        Ok(Discrimination { bit: sample_bit(acceptance, seed), acceptance })
    }

    /// Orthonormal basis of the support of `rho` (singular values above `b`).
    pub fn support_basis(&self) -> ComplexMatrix {
        let keep: Vec<usize> = (0..self.values.len()).filter(|&i| self.values[i] >= self.disc.b).collect();
        self.vectors.select_columns(keep.iter())
    }

    /// `Tr[Q xi]` for the support projector `Q`.
    pub fn support_mass<X: QuadForm + ?Sized>(&self, xi: &X) -> f64 {
        crate::linalg::projected_mass(&self.support_basis(), xi)
    }
}

pub fn distinguisher<X: QuadForm + ?Sized>(
    rho_surrogate: &LowRankState,
    input: &X,
    n_qubits: usize,
    lambda: usize,
    backend: SvdBackend,
    seed: &SeedPath,
    log: &mut BoundaryLog,
) -> Result<Discrimination> {
    SupportDistinguisher::new(rho_surrogate, n_qubits, lambda, backend, log)?.run(input, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::choi::{haar_reference, keyed_choi, ChoiShape};
    use crate::adversary::Candidate;
    use crate::budget::Budget;
    use crate::oracle::{toy_pru_candidate, Oracles, SwapOracleFamily};

    fn keyed(lambda: usize, ell: usize, seed: u64) -> (LowRankState, ChoiShape) {
        let fam = SwapOracleFamily::new(SeedPath::new(seed));
        let cand = toy_pru_candidate(lambda, 1 << ell, 0, &[0, 0], &SeedPath::new(seed + 1)).unwrap();
        let rho = keyed_choi(&Candidate::Pru(&cand), &Oracles::swap(&fam), ell, &Budget::default()).unwrap();
        (rho, ChoiShape { lambda, stretch: 0, ancillas: 0, ell })
    }

    #[test]
    fn accepts_own_state_and_rejects_haar_reference() {
        let b = Budget::default();
        let mut haar_acc = Vec::new();
        for lambda in 1..=3 {
            let (rho, shape) = keyed(lambda, 2, 10);
            let mut log = BoundaryLog::default();
            let d = SupportDistinguisher::new(&rho, shape.qubits(), lambda, SvdBackend::Ideal, &mut log).unwrap();
            assert_eq!(log.crossings.len(), 1);
            assert!(d.acceptance(&rho).unwrap() >= 0.99);
            haar_acc.push(d.acceptance(&haar_reference(&shape, &b).unwrap()).unwrap());
        }
        assert!(haar_acc[1] <= 0.2, "{haar_acc:?}");
        assert!(haar_acc.windows(2).all(|w| w[1] < w[0]), "{haar_acc:?}");
    }

    #[test]
    fn backends_agree_within_eta_at_attack_parameters() {
        let b = Budget::default();
        let (rho, shape) = keyed(1, 1, 20);
        let mut log = BoundaryLog::default();
        let ideal = SupportDistinguisher::new(&rho, shape.qubits(), 1, SvdBackend::Ideal, &mut log).unwrap();
        let poly = SupportDistinguisher::new(&rho, shape.qubits(), 1, SvdBackend::Poly, &mut log).unwrap();
        assert_eq!(ideal.path, DistinguisherPath::DenseBlock);
        let haar = haar_reference(&shape, &b).unwrap();
        for (x, y) in [(ideal.acceptance(&rho).unwrap(), poly.acceptance(&rho).unwrap()), (ideal.acceptance(&haar).unwrap(), poly.acceptance(&haar).unwrap())] {
            assert!((x - y).abs() <= poly.disc.eta, "{x} vs {y}");
        }
    }

    #[test]
    fn backends_agree_to_1e6_with_a_fine_polynomial() {
        let b = Budget::default();
        let (rho, shape) = keyed(1, 1, 20);
        let mut log = BoundaryLog::default();
        let ideal = SupportDistinguisher::with_eta(&rho, shape.qubits(), 1e-7, SvdBackend::Ideal, &mut log).unwrap();
        let poly = SupportDistinguisher::with_eta(&rho, shape.qubits(), 1e-7, SvdBackend::Poly, &mut log).unwrap();
        let haar = haar_reference(&shape, &b).unwrap();
        for (x, y) in [(ideal.acceptance(&rho).unwrap(), poly.acceptance(&rho).unwrap()), (ideal.acceptance(&haar).unwrap(), poly.acceptance(&haar).unwrap())] {
            assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn dense_and_low_rank_paths_agree() {
        let (rho, shape) = keyed(1, 2, 30);
        let b = Budget::default();
        let haar = haar_reference(&shape, &b).unwrap();
        let mut log = BoundaryLog::default();
        let dense = SupportDistinguisher::new(&rho, 4, 1, SvdBackend::Ideal, &mut log).unwrap();
        let (v, w) = boundary_spectrum(&rho, &mut log);
        let direct = dense.disc.acceptance(&v, &w, &haar);
        assert!((dense.acceptance(&haar).unwrap() - direct).abs() < 1e-9);
        assert_eq!(log.crossings.len(), 2);
    }

    #[test]
    fn oversized_polynomial_is_a_sizing_error() {
        let (rho, shape) = keyed(2, 2, 40);
        let mut log = BoundaryLog::default();
        let err = SupportDistinguisher::new(&rho, shape.qubits(), 2, SvdBackend::Poly, &mut log).unwrap_err();
        assert!(err.is_usage());
    }
}
