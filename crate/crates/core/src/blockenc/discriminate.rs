//! Singular-value projectors and the singular-value discrimination test.
//!
//! Both backends measure a POVM element that is a function of the block's
//! singular spectrum: the ideal backend uses the indicator of `sigma >= theta`
//! with `theta = (a + b) / 2`, the polynomial backend uses the threshold
//! polynomial `p(sigma)`. Acceptance is returned exactly, together with a
//! Bernoulli sample drawn from it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{extract_block, BlockEncoding};
use super::poly::{threshold_poly, ThresholdPoly};
use crate::error::{QsepError, Result};
use crate::haar::SeedPath;
use crate::linalg::{ComplexMatrix, ComplexVector, DensityMatrix, QuadForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SvdBackend {
    Ideal,
    Poly,
}

impl std::str::FromStr for SvdBackend {
    type Err = QsepError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(SvdBackend::Ideal),
            "poly" | "polynomial" => Ok(SvdBackend::Poly),
            other => Err(QsepError::Usage(format!("unknown backend {other}"))),
        }
    }
}

/// Right singular vectors (as columns) and singular values, descending.
pub fn right_singular_system(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = ComplexMatrix::from_columns(&order.iter().map(|&i| v_t.row(i).adjoint()).collect::<Vec<_>>());
    (values, vectors)
}

/// `sum |v_i><v_i|` over right singular vectors with `sigma_i >= theta`.
pub fn sv_projector(m: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let (values, vectors) = right_singular_system(m);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= theta).collect();
    let v = vectors.select_columns(keep.iter());
    &v * v.adjoint()
}

/// A configured discrimination test for the promise `sigma <= a` versus `sigma >= b`.
#[derive(Clone, Debug)]
pub struct Discriminator {
    pub a: f64,
    pub b: f64,
    pub eta: f64,
    pub backend: SvdBackend,
    pub poly: Option<ThresholdPoly>,
}

impl Discriminator {
    pub fn new(a: f64, b: f64, eta: f64, backend: SvdBackend) -> Result<Self> {
        if !(0.0..1.0).contains(&a) || !(b > a && b <= 1.0) {
            return Err(QsepError::InvalidInput(format!("need 0 <= a < b <= 1, got a = {a}, b = {b}")));
        }
        let poly = match backend {
            SvdBackend::Ideal => None,
            SvdBackend::Poly => Some(threshold_poly(a, b, eta)?),
        };
        Ok(Discriminator { a, b, eta, backend, poly })
    }

    pub fn threshold(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// Degree of the threshold polynomial, i.e. the number of block-encoding
    /// queries the transformation would use.
    pub fn degree(&self) -> usize {
        self.poly.as_ref().map(|p| p.degree).unwrap_or(0)
    }

    /// POVM weight assigned to singular value `sigma`.
    pub fn weight(&self, sigma: f64) -> f64 {
        match &self.poly {
            None => {
                if sigma >= self.threshold() {
                    1.0
                } else {
                    0.0
                }
            }
            Some(p) => p.eval(sigma.clamp(0.0, 1.0)),
        }
    }

    /// `sum_i f(sigma_i) <v_i|xi|v_i> + f(0) (Tr xi - sum_i <v_i|xi|v_i>)` for
    /// a partial singular system; directions outside the listed vectors have
    /// singular value zero.
    pub fn acceptance<X: QuadForm + ?Sized>(&self, values: &[f64], vectors: &ComplexMatrix, xi: &X) -> f64 {
        let mut covered = 0.0;
        let mut acc = 0.0;
        for (i, &s) in values.iter().enumerate() {
            let w = xi.expect(&vectors.column(i).into_owned());
            covered += w;
            acc += self.weight(s) * w;
        }
        let rest = (xi.trace() - covered).max(0.0);
        (acc + self.weight(0.0) * rest).clamp(0.0, 1.0)
    }

    pub fn acceptance_for_block<X: QuadForm + ?Sized>(&self, block: &ComplexMatrix, xi: &X) -> Result<f64> {
        if block.ncols() != xi.dim() {
            return Err(QsepError::Dimension(format!("block acts on {} dims, input has {}", block.ncols(), xi.dim())));
        }
        let (values, vectors) = right_singular_system(block);
        Ok(self.acceptance(&values, &vectors, xi))
    }
}

/// Bernoulli sample with success probability `p`.
pub fn sample_bit(p: f64, seed: &SeedPath) -> bool {
    seed.rng().gen::<f64>() < p
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrimination {
    pub bit: bool,
    pub acceptance: f64,
}

pub fn svd_discriminate(
    be: &BlockEncoding,
    xi: &DensityMatrix,
    a: f64,
    b: f64,
    eta: f64,
    backend: SvdBackend,
    seed: &SeedPath,
) -> Result<Discrimination> {
    if xi.dim() != be.block_dim {
        return Err(QsepError::Dimension(format!("input has dimension {}, block has {}", xi.dim(), be.block_dim)));
    }
    let disc = Discriminator::new(a, b, eta, backend)?;
    let block = extract_block(be)?;
    let acceptance = disc.acceptance_for_block(&block, xi)?;
    Ok(Discrimination { bit: sample_bit(acceptance, seed), acceptance })
}

/// Unit vector helper used by promise-instance builders.
pub fn normalized(v: ComplexVector) -> ComplexVector {
    let n = v.norm();
    v / crate::linalg::cr(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockenc::encoding::{block_encode_density, dilation_encoding, purify};
    use crate::linalg::random::{gaussian_vector, random_density};
    use crate::linalg::{max_abs_diff, PureState};

    #[test]
    fn projector_limits() {
        let mut rng = SeedPath::new(1).rng();
        let rho = random_density(&mut rng, 2, 2);
        let p = sv_projector(rho.matrix(), 1e-12);
        let support = crate::linalg::support_projector_matrix(rho.matrix(), 1e-10).unwrap();
        assert!(max_abs_diff(&p, &support) < 1e-9);
        let none = sv_projector(rho.matrix(), 2.0);
        assert!(none.norm() < 1e-14);
    }

    #[test]
    fn promise_cases() {
        let mut rng = SeedPath::new(2).rng();
        let psi = PureState::new(normalized(gaussian_vector(&mut rng, 4))).unwrap();
        let rho = psi.to_density();
        let be = block_encode_density(&purify(&rho), 2, 2).unwrap();
        for backend in [SvdBackend::Ideal, SvdBackend::Poly] {
            let top = svd_discriminate(&be, &rho, 0.1, 0.5, 0.05, backend, &SeedPath::new(3)).unwrap();
            assert!(top.acceptance >= 0.95);
            let mut v = gaussian_vector(&mut rng, 4);
            let overlap = psi.amplitudes().dotc(&v);
            v -= psi.amplitudes() * overlap;
            let perp = PureState::new(normalized(v)).unwrap().to_density();
            let low = svd_discriminate(&be, &perp, 0.1, 0.5, 0.05, backend, &SeedPath::new(4)).unwrap();
            assert!(low.acceptance <= 0.05);
        }
    }

    #[test]
    fn backends_agree_on_promise_instances() {
        let mut rng = SeedPath::new(5).rng();
        let (a, b, eta) = (0.2, 0.6, 0.05);
        let ideal = Discriminator::new(a, b, eta, SvdBackend::Ideal).unwrap();
        let poly = Discriminator::new(a, b, eta, SvdBackend::Poly).unwrap();
        for _ in 0..20 {
            let rho = random_density(&mut rng, 2, 2);
            let m = dilation_encoding(rho.matrix(), 0.0).unwrap();
            let block = extract_block(&m).unwrap();
            let (values, vectors) = right_singular_system(&block);
            // Input supported on singular directions outside the gap.
            let mut xi = ComplexMatrix::zeros(4, 4);
            for (i, &s) in values.iter().enumerate() {
                if s <= a || s >= b {
                    let v = vectors.column(i).into_owned();
                    xi += &v * v.adjoint();
                }
            }
            let tr = xi.trace().re;
            let xi = xi / crate::linalg::cr(tr);
            let pa = ideal.acceptance(&values, &vectors, &xi);
            let pp = poly.acceptance(&values, &vectors, &xi);
            assert!((pa - pp).abs() <= eta.max(1e-6));
        }
    }

    #[test]
    fn partial_spectrum_matches_full() {
        let mut rng = SeedPath::new(6).rng();
        let rho = random_density(&mut rng, 3, 2);
        let xi = random_density(&mut rng, 3, 8);
        let disc = Discriminator::new(0.05, 0.2, 0.1, SvdBackend::Poly).unwrap();
        let full = disc.acceptance_for_block(rho.matrix(), &xi).unwrap();
        let eig = crate::linalg::hermitian_eigen(rho.matrix());
        let partial = disc.acceptance(&eig.values[..2], &eig.vectors.columns(0, 2).into_owned(), &xi);
        assert!((full - partial).abs() < 1e-9);
    }
}
