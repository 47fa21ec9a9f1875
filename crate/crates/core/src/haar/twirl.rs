//! Exact and Monte-Carlo `ell`-fold twirls and Haar moment states.
//!
//! Operators act on `ell` copies of a `d`-dimensional register, optionally
//! followed by a bystander register that the twirl leaves untouched.
//! The exact twirl projects onto the commutant `span{R_pi ⊗ Y}` through the
//! pseudo-inverse of the permutation Gram matrix, so it stays valid when
//! `d < ell` and the permutation operators are linearly dependent.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::haar_unitary_matrix;
use super::seed::SeedPath;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::linalg::{
    all_perms, binomial, cr, permute_table, qubits_of, tensor, weingarten_matrix, ComplexMatrix, DensityMatrix,
    UnitaryMatrix, C64,
};

/// Monte-Carlo samples are grouped in fixed chunks so that the summation
/// order, and hence the result, is independent of the worker count.
pub const MC_CHUNK: usize = 256;

/// Which distribution a twirl averages over.
#[derive(Clone, Debug)]
pub enum TwirlSource {
    Haar,
    Ensemble(Vec<UnitaryMatrix>),
    /// Keyed family of a named candidate, materialized by the caller.
    KeyedCandidate { name: String, members: Vec<UnitaryMatrix> },
}

#[derive(Clone, Debug)]
pub struct TwirlSpec {
    pub ell: usize,
    pub dim: usize,
    pub source: TwirlSource,
}

/// Serializable summary of a [`TwirlSpec`] for reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwirlSpecSummary {
    pub ell: usize,
    pub dim: usize,
    pub source: String,
    pub members: usize,
}

impl TwirlSpec {
    pub fn new(ell: usize, dim: usize, source: TwirlSource) -> Result<Self> {
        let members = match &source {
            TwirlSource::Haar => &[][..],
            TwirlSource::Ensemble(m) => &m[..],
            TwirlSource::KeyedCandidate { members, .. } => &members[..],
        };
        if members.iter().any(|u| u.dim() != dim) {
            return Err(QsepError::Dimension(format!("ensemble members must all have dimension {dim}")));
        }
        Ok(TwirlSpec { ell, dim, source })
    }

    pub fn summary(&self) -> TwirlSpecSummary {
        let (source, members) = match &self.source {
            TwirlSource::Haar => ("haar".to_string(), 0),
            TwirlSource::Ensemble(m) => ("ensemble".to_string(), m.len()),
            TwirlSource::KeyedCandidate { name, members } => (format!("keyed:{name}"), members.len()),
        };
        TwirlSpecSummary { ell: self.ell, dim: self.dim, source, members }
    }

    /// Applies the twirl exactly (Haar through the commutant, ensembles by averaging).
    pub fn apply(&self, x: &ComplexMatrix, budget: &Budget) -> Result<ComplexMatrix> {
        match &self.source {
            TwirlSource::Haar => twirl_exact_matrix(x, self.dim, self.ell, budget),
            TwirlSource::Ensemble(m) | TwirlSource::KeyedCandidate { members: m, .. } => {
                ensemble_twirl_matrix(m, self.ell, x)
            }
        }
    }
}

fn split_dims(x: &ComplexMatrix, d: usize, ell: usize) -> Result<(usize, usize)> {
    if !x.is_square() {
        return Err(QsepError::Dimension("twirl input must be square".into()));
    }
    let da = d.checked_pow(ell as u32).ok_or_else(|| QsepError::Sizing("d^ell overflows".into()))?;
    if da == 0 || x.nrows() % da != 0 {
        return Err(QsepError::Dimension(format!(
            "input dimension {} is not a multiple of {d}^{ell}",
            x.nrows()
        )));
    }
    Ok((da, x.nrows() / da))
}

/// `Tr_A[(R_sigma^dagger ⊗ I) X]` for every permutation in `perms`.
fn permutation_marginals(x: &ComplexMatrix, d: usize, perms: &[Vec<usize>], db: usize) -> Vec<ComplexMatrix> {
    perms
        .iter()
        .map(|sigma| {
            let table = permute_table(sigma, d);
            let mut z = ComplexMatrix::zeros(db, db);
            for (a, &pa) in table.iter().enumerate() {
                for b in 0..db {
                    for b2 in 0..db {
                        z[(b, b2)] += x[(pa * db + b, a * db + b2)];
                    }
                }
            }
            z
        })
        .collect()
}

/// `sum_pi R_pi ⊗ Y_pi` as a dense matrix.
fn assemble(d: usize, perms: &[Vec<usize>], ys: &[ComplexMatrix], da: usize, db: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for (pi, y) in perms.iter().zip(ys) {
        let table = permute_table(pi, d);
        for (a2, &a1) in table.iter().enumerate() {
            for b in 0..db {
                for b2 in 0..db {
                    out[(a1 * db + b, a2 * db + b2)] += y[(b, b2)];
                }
            }
        }
    }
    out
}

/// Exact Haar twirl of the first `ell` copies of dimension `d`.
pub fn twirl_exact_matrix(x: &ComplexMatrix, d: usize, ell: usize, budget: &Budget) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(QsepError::InvalidInput("twirl needs d >= 1".into()));
    }
    budget.check_twirl(d, ell)?;
    let (da, db) = split_dims(x, d, ell)?;
    let perms = all_perms(ell);
    let w = weingarten_matrix(d as f64, ell);
    let z = permutation_marginals(x, d, &perms, db);
    let ys: Vec<ComplexMatrix> = (0..perms.len())
        .map(|p| {
            let mut y = ComplexMatrix::zeros(db, db);
            for (s, zs) in z.iter().enumerate() {
                y += zs * cr(w[(p, s)]);
            }
            y
        })
        .collect();
    Ok(assemble(d, &perms, &ys, da, db))
}

pub fn twirl_exact(rho: &DensityMatrix, d: usize, ell: usize, budget: &Budget) -> Result<DensityMatrix> {
    let m = twirl_exact_matrix(rho.matrix(), d, ell, budget)?;
    Ok(DensityMatrix::trusted((&m + m.adjoint()) * cr(0.5)))
}

/// Frobenius distance from `x` (no bystander) to its projection onto `span{R_pi}`.
pub fn perm_span_residual(x: &ComplexMatrix, d: usize, ell: usize, budget: &Budget) -> Result<f64> {
    let p = twirl_exact_matrix(x, d, ell, budget)?;
    Ok(crate::linalg::frobenius_norm(&(x - p)))
}

/// `U^{⊗ell} ⊗ I_bystander`.
fn tensor_power(u: &ComplexMatrix, ell: usize, db: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1, 1);
    for _ in 0..ell {
        acc = tensor(&acc, u);
    }
    tensor(&acc, &ComplexMatrix::identity(db, db))
}

/// Sums `f(i)` over `0..count` in fixed chunks evaluated in parallel.
pub fn chunked_sum(count: usize, dim: usize, f: impl Fn(usize) -> ComplexMatrix + Sync) -> ComplexMatrix {
    let chunks = count.div_ceil(MC_CHUNK);
    let partials: Vec<ComplexMatrix> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for i in (c * MC_CHUNK)..((c + 1) * MC_CHUNK).min(count) {
                acc += f(i);
            }
            acc
        })
        .collect();
    partials.into_iter().fold(ComplexMatrix::zeros(dim, dim), |a, b| a + b)
}

/// Empirical mean of `U^{⊗ell} X U^{†⊗ell}` over `samples` Haar draws. Draw
/// `i` uses the seed path `seed/trial=i`.
pub fn twirl_mc_matrix(x: &ComplexMatrix, d: usize, ell: usize, samples: usize, seed: &SeedPath) -> Result<ComplexMatrix> {
    let (_, db) = split_dims(x, d, ell)?;
    if samples == 0 {
        return Err(QsepError::InvalidInput("twirl_mc needs at least one sample".into()));
    }
    let sum = chunked_sum(samples, x.nrows(), |i| {
        let u = haar_unitary_matrix(&mut seed.child("trial", i as u64).rng(), d);
        let big = tensor_power(&u, ell, db);
        &big * x * big.adjoint()
    });
    Ok(sum / cr(samples as f64))
}

pub fn twirl_mc(rho: &DensityMatrix, d: usize, ell: usize, samples: usize, seed: &SeedPath) -> Result<DensityMatrix> {
    let m = twirl_mc_matrix(rho.matrix(), d, ell, samples, seed)?;
    Ok(DensityMatrix::trusted((&m + m.adjoint()) * cr(0.5)))
}

/// Uniform average of the `ell`-fold conjugation over an explicit ensemble.
pub fn ensemble_twirl_matrix(us: &[UnitaryMatrix], ell: usize, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let first = us.first().ok_or_else(|| QsepError::InvalidInput("empty ensemble".into()))?;
    let d = first.dim();
    if us.iter().any(|u| u.dim() != d) {
        return Err(QsepError::Dimension("ensemble members differ in dimension".into()));
    }
    let (_, db) = split_dims(x, d, ell)?;
    let mut acc = ComplexMatrix::zeros(x.nrows(), x.ncols());
    for u in us {
        let big = tensor_power(u.matrix(), ell, db);
        acc += &big * x * big.adjoint();
    }
    Ok(acc / cr(us.len() as f64))
}

pub fn ensemble_twirl(us: &[UnitaryMatrix], ell: usize, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let m = ensemble_twirl_matrix(us, ell, rho.matrix())?;
    Ok(DensityMatrix::trusted((&m + m.adjoint()) * cr(0.5)))
}

/// `Pi_sym / binom(d + ell - 1, ell)` for any `d`.
pub fn state_moment_matrix(d: usize, ell: usize, budget: &Budget) -> Result<ComplexMatrix> {
    let p = crate::linalg::sym_projector(d, ell, budget)?;
    Ok(p / cr(binomial((d + ell - 1) as u64, ell as u64)))
}

pub fn state_moment_exact(d: usize, ell: usize, budget: &Budget) -> Result<DensityMatrix> {
    let m = state_moment_matrix(d, ell, budget)?;
    qubits_of(m.nrows())?;
    Ok(DensityMatrix::trusted(m))
}

/// Empirical mean of `|psi><psi|^{⊗ell}` over Haar states.
pub fn state_moment_mc(d: usize, ell: usize, samples: usize, seed: &SeedPath, budget: &Budget) -> Result<ComplexMatrix> {
    budget.check_twirl(d, ell)?;
    if samples == 0 {
        return Err(QsepError::InvalidInput("state_moment_mc needs at least one sample".into()));
    }
    let dim = d.pow(ell as u32);
    let sum = chunked_sum(samples, dim, |i| {
        let mut rng = seed.child("trial", i as u64).rng();
        let v = crate::linalg::random::gaussian_vector(&mut rng, d);
        let v = &v / cr(v.norm());
        let mut big = nalgebra::DVector::from_element(1, cr(1.0));
        for _ in 0..ell {
            big = big.kronecker(&v);
        }
        &big * big.adjoint()
    });
    Ok(sum / cr(samples as f64))
}

/// `sum_pi (1/2^{n ell}) R_pi ⊗ Tr_A[(R_pi^dagger ⊗ I) X]` on `ell` copies of
/// `n` qubits followed by a bystander.
pub fn twirl_permutation_approx_matrix(x: &ComplexMatrix, n: usize, ell: usize, budget: &Budget) -> Result<ComplexMatrix> {
    let d = 1usize << n;
    budget.check_twirl(d, ell)?;
    let (da, db) = split_dims(x, d, ell)?;
    let perms = all_perms(ell);
    let z = permutation_marginals(x, d, &perms, db);
    let scale = cr(1.0 / da as f64);
    let ys: Vec<ComplexMatrix> = z.into_iter().map(|m| m * scale).collect();
    Ok(assemble(d, &perms, &ys, da, db))
}

/// Approximate twirl of a state. The output need not be positive, so it is
/// returned as a Hermitian matrix.
pub fn twirl_permutation_approx(rho: &DensityMatrix, n: usize, ell: usize, budget: &Budget) -> Result<ComplexMatrix> {
    let m = twirl_permutation_approx_matrix(rho.matrix(), n, ell, budget)?;
    Ok((&m + m.adjoint()) * cr(0.5))
}

/// Gram-weighted coefficients `W[pi, sigma]` of the exact twirl, exposed
/// for the structured Haar references.
pub fn twirl_weights(d: f64, ell: usize) -> DMatrix<f64> {
    weingarten_matrix(d, ell)
}

/// Amplitude-level `U^{⊗ell}` applied to a vector on `ell` copies plus bystander.
pub fn apply_tensor_power(u: &ComplexMatrix, ell: usize, v: &[C64]) -> Vec<C64> {
    let d = u.nrows();
    let mut state = v.to_vec();
    let da = d.pow(ell as u32);
    let db = v.len() / da;
    let mut stride = da / d * db;
    for _ in 0..ell {
        let mut next = vec![C64::new(0.0, 0.0); state.len()];
        let block = stride * d;
        for outer in (0..state.len()).step_by(block) {
            for inner in 0..stride {
                for r in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..d {
                        acc += u[(r, c)] * state[outer + c * stride + inner];
                    }
                    next[outer + r * stride + inner] = acc;
                }
            }
        }
        state = next;
        stride /= d;
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample::haar_unitary_with;
    use crate::linalg::random::{gaussian_matrix, random_density};
    use crate::linalg::{max_abs_diff, permutation_matrix, trace_norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_psd(rng: &mut ChaCha20Rng, dim: usize) -> ComplexMatrix {
        let g = gaussian_matrix(rng, dim, dim);
        let m = &g * g.adjoint();
        let t = m.trace();
        m / t
    }

    #[test]
    fn first_moment_twirl_depolarizes() {
        let b = Budget::default();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = random_psd(&mut rng, 4);
        let out = twirl_exact_matrix(&x, 4, 1, &b).unwrap();
        assert!(max_abs_diff(&out, &(ComplexMatrix::identity(4, 4) * (x.trace() / cr(4.0)))) < 1e-12);
        // With a bystander the marginal survives.
        let y = random_psd(&mut rng, 8);
        let out = twirl_exact_matrix(&y, 2, 1, &b).unwrap();
        let marg = crate::linalg::partial_trace_matrix(&y, &[1, 2], &[1]).unwrap();
        let expected = tensor(&(ComplexMatrix::identity(2, 2) * cr(0.5)), &marg);
        assert!(max_abs_diff(&out, &expected) < 1e-12);
    }

    #[test]
    fn exact_twirl_is_idempotent_and_in_commutant() {
        let b = Budget::default();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for (d, ell) in [(2, 2), (3, 2), (2, 3)] {
            let x = random_psd(&mut rng, d * d * if ell == 3 { d } else { 1 });
            let t1 = twirl_exact_matrix(&x, d, ell, &b).unwrap();
            let t2 = twirl_exact_matrix(&t1, d, ell, &b).unwrap();
            assert!(max_abs_diff(&t1, &t2) < 1e-8);
            assert!(perm_span_residual(&t1, d, ell, &b).unwrap() < 1e-8);
            let v = haar_unitary_with(&mut rng, d);
            let big = tensor_power(v.matrix(), ell, 1);
            assert!(max_abs_diff(&(&big * &t1), &(&t1 * &big)) < 1e-7);
            assert!((t1.trace() - x.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn exact_twirl_with_d_below_ell() {
        let b = Budget::default();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        // d = 2, ell = 3 has dependent permutation operators already; d = 1 is fully degenerate.
        let x = random_psd(&mut rng, 1);
        let out = twirl_exact_matrix(&x, 1, 3, &b).unwrap();
        assert!(max_abs_diff(&out, &x) < 1e-10);
    }

    #[test]
    fn exact_twirl_matches_monte_carlo() {
        let b = Budget::default();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let x = random_psd(&mut rng, 9);
        let exact = twirl_exact_matrix(&x, 3, 2, &b).unwrap();
        let mc = twirl_mc_matrix(&x, 3, 2, 4000, &SeedPath::new(5)).unwrap();
        assert!(trace_norm(&(exact - mc)) < 0.05);
    }

    #[test]
    fn monte_carlo_is_partition_independent() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let x = random_psd(&mut rng, 4);
        let seed = SeedPath::new(9);
        let a = twirl_mc_matrix(&x, 2, 2, 600, &seed).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| twirl_mc_matrix(&x, 2, 2, 600, &seed).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn ensemble_twirl_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let u = haar_unitary_with(&mut rng, 2);
        let x = random_psd(&mut rng, 8);
        let single = ensemble_twirl_matrix(std::slice::from_ref(&u), 2, &x).unwrap();
        let big = tensor_power(u.matrix(), 2, 2);
        assert!(max_abs_diff(&single, &(&big * &x * big.adjoint())) < 1e-12);
        let ids = vec![UnitaryMatrix::identity(2), UnitaryMatrix::identity(2)];
        assert!(max_abs_diff(&ensemble_twirl_matrix(&ids, 2, &x).unwrap(), &x) < 1e-14);
        assert!(ensemble_twirl_matrix(&[], 2, &x).is_err());
        let ens: Vec<UnitaryMatrix> = (0..5).map(|_| haar_unitary_with(&mut rng, 2)).collect();
        let out = ensemble_twirl_matrix(&ens, 3, &x).unwrap();
        assert!(crate::linalg::hermitian_defect(&out) < 1e-12);
        assert!((out.trace() - x.trace()).norm() < 1e-12);
    }

    #[test]
    fn state_moment_examples() {
        let b = Budget::default();
        let m = state_moment_exact(2, 2, &b).unwrap();
        let expected = (ComplexMatrix::identity(4, 4) + permutation_matrix(&[1, 0], 2)) / cr(6.0);
        assert!(max_abs_diff(m.matrix(), &expected) < 1e-15);
        let m1 = state_moment_exact(4, 1, &b).unwrap();
        assert!(max_abs_diff(m1.matrix(), &(ComplexMatrix::identity(4, 4) * cr(0.25))) < 1e-15);
        let rank = crate::linalg::hermitian_eigen(state_moment_exact(4, 2, &b).unwrap().matrix())
            .values
            .iter()
            .filter(|&&x| x > 1e-10)
            .count();
        assert_eq!(rank, 10);
    }

    #[test]
    fn permutation_approx_single_copy() {
        let b = Budget::default();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let rho = random_density(&mut rng, 3, 3);
        let out = twirl_permutation_approx(&rho, 2, 1, &b).unwrap();
        let marg = crate::linalg::partial_trace_matrix(rho.matrix(), &[2, 1], &[1]).unwrap();
        let expected = tensor(&(ComplexMatrix::identity(4, 4) * cr(0.25)), &marg);
        assert!(max_abs_diff(&out, &expected) < 1e-12);
        assert!((out.trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn permutation_approx_trace_for_two_copies() {
        // Tr = sum_pi d^{c(pi) - ell} Tr[R_pi^dagger rho_A], which is 1 + Tr[SWAP rho_A]/d at ell = 2.
        let b = Budget::default();
        let mut rng = ChaCha20Rng::seed_from_u64(18);
        let rho = random_density(&mut rng, 5, 4);
        let out = twirl_permutation_approx(&rho, 2, 2, &b).unwrap();
        let rho_a = crate::linalg::partial_trace_matrix(rho.matrix(), &[4, 1], &[0]).unwrap();
        let swap = permutation_matrix(&[1, 0], 4);
        let expected = 1.0 + (swap * rho_a).trace().re / 4.0;
        assert!((out.trace().re - expected).abs() < 1e-12);
    }

    #[test]
    fn tensor_power_kernel_matches_dense() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let u = haar_unitary_with(&mut rng, 2);
        let v = crate::linalg::random::gaussian_vector(&mut rng, 16);
        let dense = tensor_power(u.matrix(), 3, 2) * &v;
        let fast = apply_tensor_power(u.matrix(), 3, v.as_slice());
        for (a, b) in dense.iter().zip(&fast) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
