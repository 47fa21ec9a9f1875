//! Process tomography of unitary channels.
//!
//! Exact mode reads the `D` columns of the channel from `D` applications to
//! basis states. Sampled mode simulates finite statistics: every entry
//! `<k|Z|j>` is estimated from two Hadamard-test style Bernoulli experiments,
//! one for the real part (`Pr[0] = (1 + Re z) / 2`) and one for the
//! imaginary part, with the shot budget
//! `N = ceil(C_TOM * D^3 / eps^2 * ln(D / eta))` split evenly over the
//! `2 D^2` experiments. The estimate is projected to the nearest unitary
//! and its global phase is canonicalized.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QsepError, Result};
use crate::haar::SeedPath;
use crate::linalg::{cr, unitarity_defect, ComplexMatrix, UnitaryMatrix, C64};

/// Calibrated constant of the sampled-mode shot formula.
pub const C_TOM: f64 = 8.0;
/// Column Gram defect above which a channel is rejected as non-unitary.
pub const GRAM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TomographyMode {
    Exact,
    Sampled,
}

impl std::str::FromStr for TomographyMode {
    type Err = QsepError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(TomographyMode::Exact),
            "sampled" => Ok(TomographyMode::Sampled),
            other => Err(QsepError::Usage(format!("unknown tomography mode {other}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TomographyResult {
    pub estimate: UnitaryMatrix,
    pub mode: TomographyMode,
    /// Channel applications in exact mode, measurement shots in sampled mode.
    pub shots_used: u64,
    pub claimed_eps: f64,
    pub claimed_eta: f64,
}

/// Black-box access to a unitary channel on `dim` dimensions.
pub trait UnitaryChannel: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>>;
}

impl UnitaryChannel for UnitaryMatrix {
    fn dim(&self) -> usize {
        UnitaryMatrix::dim(self)
    }
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        Ok((self.matrix() * nalgebra::DVector::from_column_slice(v)).iter().cloned().collect())
    }
}

/// Channel given by a closure acting on statevectors.
pub struct FnChannel<F: Fn(&[C64]) -> Result<Vec<C64>> + Sync> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[C64]) -> Result<Vec<C64>> + Sync> UnitaryChannel for FnChannel<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        (self.f)(v)
    }
}

fn read_columns(channel: &dyn UnitaryChannel) -> Result<ComplexMatrix> {
    let d = channel.dim();
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[j] = C64::new(1.0, 0.0);
        let col = channel.apply(&e)?;
        if col.len() != d {
            return Err(QsepError::Dimension(format!("channel returned {} amplitudes, expected {d}", col.len())));
        }
        for (i, z) in col.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    let defect = unitarity_defect(&m);
    if defect > GRAM_TOL {
        return Err(QsepError::InvalidInput(format!("channel is not unitary (column Gram defect {defect:.3e})")));
    }
    Ok(m)
}

/// Multiplies by the global phase making the first largest-modulus entry of
/// column 0 real and positive.
pub fn canonical_phase(u: &UnitaryMatrix) -> UnitaryMatrix {
    let m = u.matrix();
    if m.nrows() == 0 {
        return u.clone();
    }
    let max = m.column(0).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = m.column(0).iter().find(|z| z.norm() >= max * (1.0 - 1e-9)).cloned().unwrap_or(cr(1.0));
    let phase = if pivot.norm() > 0.0 { pivot.conj() / cr(pivot.norm()) } else { cr(1.0) };
    UnitaryMatrix::trusted(m * phase)
}

/// Unitary factor `W V^dagger` of the polar decomposition `M = W S V^dagger`.
pub fn nearest_unitary(m: &ComplexMatrix) -> Result<UnitaryMatrix> {
    if !m.is_square() {
        return Err(QsepError::Dimension("nearest unitary needs a square matrix".into()));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 1e-12 * smax.max(1e-300)) {
        return Err(QsepError::InvalidInput("matrix is rank deficient".into()));
    }
    let w = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^dagger");
    Ok(UnitaryMatrix::trusted(w * v_t))
}

pub fn process_tomography_exact(channel: &dyn UnitaryChannel) -> Result<TomographyResult> {
    let m = read_columns(channel)?;
    let u = nearest_unitary(&m)?;
    Ok(TomographyResult {
        estimate: canonical_phase(&u),
        mode: TomographyMode::Exact,
        shots_used: channel.dim() as u64,
        claimed_eps: 1e-9,
        claimed_eta: 0.0,
    })
}

/// `ceil(C_TOM * D^3 / eps^2 * ln(D / eta))`, with `ln` floored at `ln 2`
/// so that `D = 1` still gets a positive budget.
pub fn sampled_shot_count(d: usize, eps: f64, eta: f64) -> u64 {
    let d = d as f64;
    (C_TOM * d.powi(3) / (eps * eps) * (d / eta).ln().max(std::f64::consts::LN_2)).ceil() as u64
}

fn estimate_part(p: f64, shots: u64, seed: &SeedPath) -> Result<f64> {
    let p = p.clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p).map_err(|e| QsepError::Numerical(format!("binomial sampler: {e}")))?;
    let hits = dist.sample(&mut seed.rng());
    Ok(2.0 * hits as f64 / shots as f64 - 1.0)
}

pub fn process_tomography_sampled(channel: &dyn UnitaryChannel, eps: f64, eta: f64, seed: &SeedPath) -> Result<TomographyResult> {
    if !(eps > 0.0 && eps < 1.0 && eta > 0.0 && eta < 1.0) {
        return Err(QsepError::InvalidInput("eps and eta must lie in (0, 1)".into()));
    }
    let truth = read_columns(channel)?;
    let d = truth.nrows();
    let total = sampled_shot_count(d, eps, eta);
    let per = (total / (2 * (d * d) as u64)).max(1);
    let entries: Vec<(usize, usize)> = (0..d).flat_map(|k| (0..d).map(move |j| (k, j))).collect();
    let estimates = entries
        .par_iter()
        .map(|&(k, j)| {
            let z = truth[(k, j)];
            let s = seed.child("row", k as u64).child("col", j as u64);
            let re = estimate_part((1.0 + z.re) / 2.0, per, &s.child("part", 0))?;
            let im = estimate_part((1.0 + z.im) / 2.0, per, &s.child("part", 1))?;
            Ok(C64::new(re, im))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = ComplexMatrix::zeros(d, d);
    for (&(k, j), z) in entries.iter().zip(estimates) {
        m[(k, j)] = z;
    }
    let u = nearest_unitary(&m)?;
    Ok(TomographyResult {
        estimate: canonical_phase(&u),
        mode: TomographyMode::Sampled,
        shots_used: per * 2 * (d * d) as u64,
        claimed_eps: eps,
        claimed_eta: eta,
    })
}

pub fn process_tomography(
    channel: &dyn UnitaryChannel,
    mode: TomographyMode,
    eps: f64,
    eta: f64,
    seed: &SeedPath,
) -> Result<TomographyResult> {
    match mode {
        TomographyMode::Exact => process_tomography_exact(channel),
        TomographyMode::Sampled => process_tomography_sampled(channel, eps, eta, seed),
    }
}

/// Fraction of `runs` sampled reconstructions with diamond error at most `eps`.
pub fn sampled_success_rate(d: usize, eps: f64, eta: f64, runs: usize, seed: &SeedPath) -> Result<f64> {
    let ok = (0..runs)
        .into_par_iter()
        .map(|r| {
            let s = seed.child("run", r as u64);
            let u = crate::haar::sample_haar_unitary(d, &s.child("truth", 0))?;
            let est = process_tomography_sampled(&u, eps, eta, &s.child("shots", 0))?;
            Ok(crate::linalg::diamond_distance_unitary(&est.estimate, &u)? <= eps)
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(ok.iter().filter(|&&b| b).count() as f64 / runs.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample_haar_unitary;
    use crate::linalg::{diamond_distance_unitary, max_abs_diff};

    #[test]
    fn exact_mode_recovers_random_unitaries() {
        for d in [1usize, 2, 4, 8, 16] {
            let u = sample_haar_unitary(d, &SeedPath::new(d as u64)).unwrap();
            let r = process_tomography_exact(&u).unwrap();
            assert_eq!(r.shots_used, d as u64);
            assert!(diamond_distance_unitary(&r.estimate, &u).unwrap() <= 1e-9);
            let again = process_tomography_exact(&u).unwrap();
            assert_eq!(again.estimate, r.estimate);
        }
        let id = process_tomography_exact(&UnitaryMatrix::identity(4)).unwrap();
        assert!(max_abs_diff(id.estimate.matrix(), &ComplexMatrix::identity(4, 4)) < 1e-14);
    }

    #[test]
    fn non_unitary_channel_is_rejected() {
        let ch = FnChannel { dim: 2, f: |v: &[C64]| Ok(vec![v[0] * cr(2.0), v[1]]) };
        assert!(process_tomography_exact(&ch).is_err());
    }

    #[test]
    fn canonical_phase_properties() {
        let u = sample_haar_unitary(4, &SeedPath::new(9)).unwrap();
        let c = canonical_phase(&u);
        assert!(max_abs_diff(canonical_phase(&c).matrix(), c.matrix()) < 1e-14);
        for theta in [0.3, 1.7, -2.9] {
            let rotated = UnitaryMatrix::trusted(u.matrix() * C64::new(0.0, theta).exp());
            assert!(max_abs_diff(canonical_phase(&rotated).matrix(), c.matrix()) < 1e-12);
        }
    }

    #[test]
    fn nearest_unitary_properties() {
        let u = sample_haar_unitary(4, &SeedPath::new(10)).unwrap();
        assert!(max_abs_diff(nearest_unitary(u.matrix()).unwrap().matrix(), u.matrix()) < 1e-12);
        assert!(max_abs_diff(nearest_unitary(&(u.matrix() * cr(1.1))).unwrap().matrix(), u.matrix()) < 1e-12);
        let mut rng = SeedPath::new(11).rng();
        let m = crate::linalg::random::gaussian_matrix(&mut rng, 3, 3);
        let w = nearest_unitary(&m).unwrap();
        let best = (&m - w.matrix()).norm();
        for i in 0..50 {
            let kick = crate::oracle::game::small_kick(3, 0.05, &SeedPath::new(100 + i));
            let other = w.matrix() * kick.matrix();
            assert!((&m - other).norm() >= best - 1e-12);
        }
        assert!(nearest_unitary(&ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn sampled_mode_meets_contract_at_small_size() {
        let rate = sampled_success_rate(2, 0.1, 0.1, 100, &SeedPath::new(12)).unwrap();
        assert!(rate >= 0.9, "success rate {rate}");
        let u = sample_haar_unitary(2, &SeedPath::new(13)).unwrap();
        let r = process_tomography_sampled(&u, 0.1, 0.1, &SeedPath::new(14)).unwrap();
        let per = sampled_shot_count(2, 0.1, 0.1) / 8;
        assert_eq!(r.shots_used, per * 8);
    }

    #[test]
    fn more_shots_reduce_median_error() {
        let u = sample_haar_unitary(2, &SeedPath::new(15)).unwrap();
        let mut medians = Vec::new();
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let mut errs: Vec<f64> = (0..31)
                .map(|r| {
                    let est = process_tomography_sampled(&u, eps, 0.1, &SeedPath::new(16).child("r", r)).unwrap();
                    diamond_distance_unitary(&est.estimate, &u).unwrap()
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            medians.push(errs[15]);
        }
        assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
    }
}
