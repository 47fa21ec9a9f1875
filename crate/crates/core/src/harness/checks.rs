//! The individual lemma checks behind the dispatch table.
//!
//! Random instances are drawn from labeled children of the check's seed, so
//! each check is reproducible in isolation from its recorded parameters.

use rand::Rng;

use super::lemmas::{param, param_usize, CheckOutcome, Params, Worst};
use crate::adversary::choi::{haar_reference, keyed_choi, transpose_identity_residual, ChoiShape};
use crate::adversary::Candidate;
use crate::blockenc::{extract_block, perturbed_density_encoding, sv_projector};
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::{
    haar_choi_structured, haar_state_with, haar_unitary_with, state_moment_mc, state_moment_structured, twirl_exact,
    twirl_permutation_approx, SeedPath,
};
use crate::linalg::random::{gaussian_matrix, random_density};
use crate::linalg::sim::embed_gate;
use crate::linalg::{
    binomial, cr, frobenius_norm, gentle_residual, operator_norm, projected_mass, pure_trace_distance, sym_projector, trace_norm,
    ComplexMatrix, ComplexVector, UnitaryMatrix,
};
use crate::oracle::candidate::isometry_columns;
use crate::oracle::game::{lipschitz_check, run_game, small_kick, GameSummary};
use crate::oracle::{toy_pri_candidate, toy_pru_candidate, HriOracleFamily, Oracles, StretchFn, SwapOracleFamily};

/// Calibration constant for the big-O rate checks.
pub const C_RATE: f64 = 4.0;
/// Calibration constant `C` of the mean-advantage bound `C T^2 / 2^lambda`.
pub const C_GAME: f64 = 0.25;
/// Slack factor on the concentration tail bounds.
pub const TAIL_SLACK: f64 = 10.0;
pub const EXACT_TOL: f64 = 1e-10;

/// A second unitary for a Lipschitz pair: independent on even trials and a
/// small kick of `u` on odd ones.
fn partner(u: &UnitaryMatrix, d: usize, i: usize, trials: usize, s: &SeedPath) -> Result<UnitaryMatrix> {
    if i % 2 == 0 {
        Ok(haar_unitary_with(&mut s.child("v", 0).rng(), d))
    } else {
        let eps = 10f64.powf(-1.0 - 3.0 * (i as f64 / trials.max(1) as f64));
        u.mul(&small_kick(d, eps, &s.child("kick", 0)))
    }
}

/// Gentle measurement: `D(rho, rho') <= sqrt(eps)` for `Tr[M rho] = 1 - eps`.
pub fn gentle_measurement(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let q = param_usize(params, "qubits", 2)?;
    let trials = param_usize(params, "trials", 100)?;
    let d = 1usize << q;
    let mut w = Worst::new(1.0);
    for i in 0..trials {
        let mut rng = seed.child("trial", i as u64).rng();
        let rho = random_density(&mut rng, q, 1 + i % d);
        let v = haar_state_with(&mut rng, d).into_amplitudes();
        let m = ComplexMatrix::identity(d, d) - &v * v.adjoint();
        let eps = 1.0 - (&m * rho.matrix()).trace().re;
        let (_, dist) = gentle_residual(&m, &rho)?;
        w.push(dist, eps.max(0.0).sqrt());
    }
    Ok(w.outcome())
}

/// Hölder: `||AB||_1 <= ||A||_1 ||B||_inf`.
pub fn holder(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let d = param_usize(params, "d", 4)?;
    let trials = param_usize(params, "trials", 100)?;
    let mut w = Worst::new(1.0);
    for i in 0..trials {
        let mut rng = seed.child("trial", i as u64).rng();
        let a = gaussian_matrix(&mut rng, d, d);
        let b = gaussian_matrix(&mut rng, d, d);
        w.push(trace_norm(&(&a * &b)), trace_norm(&a) * operator_norm(&b));
    }
    Ok(w.outcome())
}

/// `f(U) = |<0| U G U |0>|^2`, a fixed two-query measurement procedure.
fn two_query_probe(u: &UnitaryMatrix, g: &UnitaryMatrix) -> f64 {
    let col = u.matrix().column(0).into_owned();
    let mid = g.matrix() * col;
    let out = u.matrix() * mid;
    out[0].norm_sqr()
}

/// `|f(U) - f(V)| <= 2T ||U - V||_2` for a `T = 2` query procedure.
pub fn lipschitz_frobenius(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let d = param_usize(params, "d", 4)?;
    let pairs = param_usize(params, "pairs", 100)?;
    let g = haar_unitary_with(&mut seed.child("probe", 0).rng(), d);
    let mut w = Worst::new(1.0);
    for i in 0..pairs {
        let s = seed.child("pair", i as u64);
        let u = haar_unitary_with(&mut s.child("u", 0).rng(), d);
        let v = partner(&u, d, i, pairs, &s)?;
        let lhs = (two_query_probe(&u, &g) - two_query_probe(&v, &g)).abs();
        w.push(lhs, 4.0 * frobenius_norm(&(u.matrix() - v.matrix())));
    }
    Ok(w.outcome())
}

/// `||U psi psi^dagger U^dagger - V psi psi^dagger V^dagger||_2 <= 2 ||U - V||_2`.
pub fn state_distance_vs_unitary(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let trials = param_usize(params, "trials", 100)?;
    let max_q = param_usize(params, "max_qubits", 4)?;
    let mut w = Worst::new(1.0);
    for i in 0..trials {
        let d = 1usize << (1 + i % max_q.max(1));
        let s = seed.child("trial", i as u64);
        let u = haar_unitary_with(&mut s.child("u", 0).rng(), d);
        let v = partner(&u, d, i, trials, &s)?;
        let psi = haar_state_with(&mut s.child("psi", 0).rng(), d).into_amplitudes();
        let a = u.apply(&psi);
        let b = v.apply(&psi);
        let lhs = frobenius_norm(&(&a * a.adjoint() - &b * b.adjoint()));
        w.push(lhs, 2.0 * frobenius_norm(&(u.matrix() - v.matrix())));
    }
    Ok(w.outcome())
}

/// Monte-Carlo `E |psi><psi|^{⊗ell}` against `Pi_sym / binom(d + ell - 1, ell)`.
pub fn symmetric_moment_mc(params: &Params, seed: &SeedPath, budget: &Budget) -> Result<CheckOutcome> {
    let d = param_usize(params, "d", 4)?;
    let ell = param_usize(params, "ell", 2)?;
    let samples = param_usize(params, "samples", 100_000)?;
    let tol = param(params, "tolerance", 0.02);
    let mc = state_moment_mc(d, ell, samples, seed, budget)?;
    let exact = sym_projector(d, ell, budget)? * cr(1.0 / binomial((d + ell - 1) as u64, ell as u64));
    let dist = 0.5 * trace_norm(&(mc - exact));
    Ok(CheckOutcome::ratio_check(dist, tol, 1.0))
}

fn haar_moment_gap(d_out: usize, d_in: usize, ell: usize) -> Result<f64> {
    Ok(haar_choi_structured(d_out, d_in, ell).sub(&state_moment_structured(d_out, d_in, ell))?.trace_norm())
}

/// `||haar Choi - E |psi><psi|^{⊗ell}||_1` against `ell^2 / d`, with the
/// ratio after one doubling of `d` recorded alongside.
pub fn haar_choi_vs_moment(params: &Params, budget: &Budget) -> Result<CheckOutcome> {
    let d = param_usize(params, "d", 4)?;
    let ell = param_usize(params, "ell", 2)?;
    rate_with_doubling(d, d, ell, budget)
}

/// The isometry analogue at `d_out = 2^{lambda + s}`, `d_in = 2^lambda`.
pub fn isometry_choi_vs_moment(params: &Params, budget: &Budget) -> Result<CheckOutcome> {
    let lambda = param_usize(params, "lambda", 1)?;
    let s = param_usize(params, "s", 1)?;
    let ell = param_usize(params, "ell", 2)?;
    rate_with_doubling(1usize << (lambda + s), 1usize << lambda, ell, budget)
}

fn rate_with_doubling(d_out: usize, d_in: usize, ell: usize, budget: &Budget) -> Result<CheckOutcome> {
    let q = |d_out: usize, d_in: usize| (d_out * d_in).trailing_zeros() as usize * ell;
    budget.check_qubits("rate check", q(d_out, d_in))?;
    let bound = |d: usize| (ell * ell) as f64 / d as f64;
    let lhs = haar_moment_gap(d_out, d_in, ell)?;
    let r = lhs / bound(d_out);
    let doubled = haar_moment_gap(2 * d_out, 2 * d_in, ell)? / bound(2 * d_out);
    Ok(CheckOutcome::ratio_check(lhs, bound(d_out), C_RATE)
        .with("ratio_doubled", doubled)
        .with("nonincreasing_on_doubling", if doubled <= r + 1e-12 { 1.0 } else { 0.0 }))
}

/// `||M_{mu,ell}(rho) - sum_pi 2^{-n ell} R_pi ⊗ Tr_A[(R_pi^dagger ⊗ I) rho]||_1`
/// against `ell^2 / 2^n` on random states, plus the doubled-`2^n` ratio.
pub fn permutation_twirl(params: &Params, seed: &SeedPath, budget: &Budget) -> Result<CheckOutcome> {
    let n = param_usize(params, "n", 2)?;
    let ell = param_usize(params, "ell", 2)?;
    let bystander = param_usize(params, "bystander", 2)?;
    let trials = param_usize(params, "trials", 10)?;
    let worst_at = |n: usize| -> Result<Worst> {
        budget.check_qubits("permutation twirl", n * ell + bystander)?;
        let mut w = Worst::new(C_RATE);
        for i in 0..trials {
            let mut rng = seed.child("n", n as u64).child("trial", i as u64).rng();
            let rho = random_density(&mut rng, n * ell + bystander, 1 + i % 4);
            let exact = twirl_exact(&rho, 1usize << n, ell, budget)?;
            let approx = twirl_permutation_approx(&rho, n, ell, budget)?;
            w.push(trace_norm(&(exact.matrix() - approx)), (ell * ell) as f64 / (1usize << n) as f64);
        }
        Ok(w)
    };
    let w = worst_at(n)?;
    let doubled = worst_at(n + 1)?.ratio;
    Ok(w.outcome()
        .with("ratio_doubled", doubled)
        .with("nonincreasing_on_doubling", if doubled <= w.ratio + 1e-12 { 1.0 } else { 0.0 }))
}

/// Tail mass of `f(U) = |U_00|^2` (2-Lipschitz) over Haar draws against
/// `exp(-(d - 2) delta^2 / (24 L^2))`.
pub fn concentration(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let d = param_usize(params, "d", 8)?;
    let draws = param_usize(params, "draws", 500)?;
    let lip = 2.0;
    let mean = 1.0 / d as f64;
    let values: Vec<f64> = (0..draws).map(|i| haar_unitary_with(&mut seed.child("draw", i as u64).rng(), d).matrix()[(0, 0)].norm_sqr()).collect();
    let mut w = Worst::new(TAIL_SLACK);
    for delta in [0.05, 0.1, 0.15, 0.2, 0.3, 0.5] {
        let tail = values.iter().filter(|&&v| v >= mean + delta).count() as f64 / draws.max(1) as f64;
        w.push(tail, (-((d as f64 - 2.0) * delta * delta) / (24.0 * lip * lip)).exp());
    }
    let empirical_mean = values.iter().sum::<f64>() / draws.max(1) as f64;
    Ok(w.outcome().with("lipschitz_constant", lip).with("empirical_mean", empirical_mean).with("exact_mean", mean))
}

fn game(params: &Params, seed: &SeedPath) -> Result<GameSummary> {
    let lambda = param_usize(params, "lambda", 2)?;
    let draws = param_usize(params, "draws", 200)?;
    let ideal = param_usize(params, "ideal_samples", 64)?;
    run_game(lambda, draws, ideal, param(params, "c", C_GAME), &seed.child("game", 0))
}

/// `|mean advantage| <= C T^2 / 2^lambda` over oracle draws.
pub fn game_mean_advantage(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let g = game(params, seed)?;
    let c = param(params, "c", C_GAME);
    let bound = if c > 0.0 { g.mean_bound / c } else { 0.0 };
    Ok(CheckOutcome::ratio_check(g.mean_advantage.abs(), bound, c).with("draws", g.draws as f64))
}

/// Exceedance frequency at `2^{-lambda/2}` against the concentration bound.
pub fn game_exceedance(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let g = game(params, seed)?;
    match g.concentration_bound {
        Some(b) => Ok(CheckOutcome::ratio_check(g.exceedance, b, TAIL_SLACK).with("threshold", g.threshold)),
        None => Ok(CheckOutcome::ratio_check(g.exceedance, 1.0, TAIL_SLACK).with("threshold", g.threshold).with("vacuous", 1.0)),
    }
}

/// `|f(U) - f(V)| <= 8T sqrt(sum_m ||U_m - V_m||_2^2)` on `S~_n(U)`.
pub fn lipschitz_l2_sum(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let n = param_usize(params, "n", 1)?;
    let t = param_usize(params, "queries", 2)?;
    let pairs = param_usize(params, "pairs", 100)?;
    let s = lipschitz_check(n, t, pairs, seed)?;
    Ok(CheckOutcome::ratio_check(s.worst_ratio, 1.0, 1.0).with("violations", s.violations as f64).with("instances", pairs as f64))
}

/// `(W ⊗ I)|Omega_{2^lambda}>|0^{anc}>` with the ancillas placed after the
/// `lambda` input qubits of `W`.
fn choi_column_state(w: &ComplexMatrix, lambda: usize, anc: usize) -> ComplexVector {
    let din = 1usize << lambda;
    let rows = w.nrows();
    let mut v = ComplexVector::zeros(rows * din);
    let amp = cr(1.0 / (din as f64).sqrt());
    for x in 0..din {
        let col = x << anc;
        for r in 0..rows {
            v[r * din + x] = w[(r, col)] * amp;
        }
    }
    v
}

/// Deleting one swap-oracle call moves the Choi vector by at most
/// `C 2^{c'/2} / 2^{n/2}` in trace distance.
pub fn swap_call_deletion(params: &Params, seed: &SeedPath, budget: &Budget) -> Result<CheckOutcome> {
    let trials = param_usize(params, "trials", 3)?;
    let max_lambda = param_usize(params, "max_lambda", 4)?;
    let fam = SwapOracleFamily::new(seed.child("family", 0));
    let mut w = Worst::new(C_RATE);
    for lambda in 1..=max_lambda {
        for cp in 0..=2usize {
            for n in 1..=4usize {
                if 2 * n + 1 > lambda + cp {
                    continue;
                }
                let q = lambda + cp;
                let s_n = fam.dense_oracle(n, budget)?;
                let wires: Vec<usize> = (0..2 * n + 1).collect();
                let s_full = embed_gate(q, s_n.matrix(), &wires)?;
                for i in 0..trials {
                    let s = seed.child("inst", ((lambda * 8 + cp) * 8 + n) as u64).child("trial", i as u64);
                    let u = haar_unitary_with(&mut s.child("u", 0).rng(), 1 << q);
                    let v = haar_unitary_with(&mut s.child("v", 0).rng(), 1 << q);
                    let with = u.matrix() * &s_full * v.matrix();
                    let without = u.matrix() * v.matrix();
                    let psi = choi_column_state(&with, lambda, cp);
                    let phi = choi_column_state(&without, lambda, cp);
                    w.push(pure_trace_distance(&psi, &phi), 2f64.powf(cp as f64 / 2.0) / 2f64.powf(n as f64 / 2.0));
                }
            }
        }
    }
    Ok(w.outcome())
}

/// Deleting one `HRI_{t,n,m}` call: trace distance against `C 2^{c' - t(n)/2}`.
pub fn hri_call_deletion(params: &Params, seed: &SeedPath, budget: &Budget) -> Result<CheckOutcome> {
    let trials = param_usize(params, "trials", 3)?;
    let max_lambda = param_usize(params, "max_lambda", 3)?;
    let fam = HriOracleFamily::new(seed.child("family", 0), StretchFn::identity());
    let mut w = Worst::new(C_RATE);
    for lambda in 1..=max_lambda {
        for cp in 1..=3usize {
            for n in 1..=3usize {
                let t = fam.t(n);
                let q = lambda + cp;
                if n + t + 1 > q || 2 * q > budget.max_total_qubits + 4 {
                    continue;
                }
                for i in 0..trials {
                    let s = seed.child("inst", ((lambda * 8 + cp) * 8 + n) as u64).child("trial", i as u64);
                    let m = s.child("m", 0).rng().gen_range(0..(1u64 << n));
                    let hri = fam.dense_oracle(n, m, budget)?;
                    let wires: Vec<usize> = (0..n + t + 1).collect();
                    let h_full = embed_gate(q, hri.matrix(), &wires)?;
                    let u = haar_unitary_with(&mut s.child("u", 0).rng(), 1 << q);
                    let v = haar_unitary_with(&mut s.child("v", 0).rng(), 1 << q);
                    let psi = choi_column_state(&(u.matrix() * &h_full * v.matrix()), lambda, cp);
                    let phi = choi_column_state(&(u.matrix() * v.matrix()), lambda, cp);
                    w.push(pure_trace_distance(&psi, &phi), 2f64.powf(cp as f64 - t as f64 / 2.0));
                }
            }
        }
    }
    Ok(w.outcome())
}

/// `Tr[HRI_{t,n,m}] = 2^{n+t+1} - 2^{n+1}` and the resulting Choi overlap.
pub fn hri_trace(params: &Params, seed: &SeedPath, budget: &Budget) -> Result<CheckOutcome> {
    let max_q = param_usize(params, "max_qubits", 8)?;
    let fam = HriOracleFamily::new(seed.child("family", 0), StretchFn::identity());
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for n in 0..=3usize {
        let t = fam.t(n);
        if n + t + 1 > max_q {
            continue;
        }
        let m = if n == 0 { 0 } else { seed.child("m", n as u64).rng().gen_range(0..(1u64 << n)) };
        let h = fam.dense_oracle(n, m, budget)?;
        let dim = h.dim() as f64;
        let tr = h.matrix().trace();
        let closed = 2f64.powi((n + t + 1) as i32) - 2f64.powi(n as i32 + 1);
        worst = worst.max((tr - cr(closed)).norm() / dim);
        let overlap = tr.norm() / dim;
        let dist = (1.0 - overlap * overlap).max(0.0).sqrt();
        let closed_dist = (1.0 - (closed / dim).powi(2)).max(0.0).sqrt();
        worst = worst.max((dist - closed_dist).abs());
        count += 1;
    }
    Ok(CheckOutcome::ratio_check(worst, 1e-9, 1.0).with("instances", count as f64))
}

/// `||(I - S_n) ⊗ I |Omega>|| = ||I - S_n||_2 / sqrt(D)` against `2^{(1-n)/2}`.
pub fn choi_shrinkage(params: &Params, seed: &SeedPath, budget: &Budget) -> Result<CheckOutcome> {
    let n = param_usize(params, "n", 3)?;
    let fam = SwapOracleFamily::new(seed.child("family", 0));
    let s = fam.dense_oracle(n, budget)?;
    let d = s.dim();
    let diff = ComplexMatrix::identity(d, d) - s.matrix();
    let measured = frobenius_norm(&diff) / (d as f64).sqrt();
    let deficit = (ComplexMatrix::identity(d, d) - s.matrix()).trace().re;
    let closed = 2f64.powf((1.0 - n as f64) / 2.0);
    Ok(CheckOutcome::equality_check(measured, closed, 1e-9).with("trace_deficit", deficit))
}

/// `Tr[Q haar] <= 2^{(1+c) ell} / binom(2^{2 lambda + s} + ell - 1, ell) + ||haar - moment||_1`
/// for the support projector `Q` of a toy keyed Choi state.
pub fn support_bound(params: &Params, seed: &SeedPath, budget: &Budget) -> Result<CheckOutcome> {
    let lambda = param_usize(params, "lambda", 2)?;
    let ell = param_usize(params, "ell", 2)?;
    let s = param_usize(params, "s", 0)?;
    let c = param_usize(params, "c", 0)?;
    let keys = param_usize(params, "keys", 1usize << ell)?;
    let shape = ChoiShape { lambda, stretch: s, ancillas: c, ell };
    budget.check_qubits("support bound", shape.qubits())?;
    let fam = SwapOracleFamily::new(seed.child("family", 0));
    let o = Oracles::swap(&fam);
    let cs = seed.child("candidate", 0);
    let calls: Vec<usize> = if lambda + s + c >= 1 { vec![0] } else { vec![] };
    let rho = if s == 0 {
        let cand = toy_pru_candidate(lambda, keys, c, &calls, &cs)?;
        keyed_choi(&Candidate::Pru(&cand), &o, ell, budget)?
    } else {
        let cand = toy_pri_candidate(lambda, keys, s, c, &calls, &cs)?;
        keyed_choi(&Candidate::Pri(&cand), &o, ell, budget)?
    };
    let q = rho.support_basis(1e-10);
    let haar = haar_reference(&shape, budget)?;
    let lhs = projected_mass(&q, &haar);
    let first = 2f64.powi(((1 + c) * ell) as i32) / binomial(((1usize << (2 * lambda + s)) + ell - 1) as u64, ell as u64);
    let gap = haar_moment_gap(shape.d_out(), shape.d_in(), ell)?;
    Ok(CheckOutcome::ratio_check(lhs, first + gap, 1.0)
        .with("support_rank", q.ncols() as f64)
        .with("rank_term", first)
        .with("moment_gap", gap))
}

/// `Tr[Pi_{>=eps} rho] >= 1 - 2^{n-p+1} - 2^n eps` for perturbed encodings.
pub fn perturbed_support_mass(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let instances = param_usize(params, "instances", 50)?;
    let max_n = param_usize(params, "max_n", 4)?;
    let mut w = Worst::new(1.0);
    for i in 0..instances {
        let n = 1 + i % max_n.max(1);
        let p = 4 * n;
        let s = seed.child("inst", i as u64);
        let rho = random_density(&mut s.child("rho", 0).rng(), n, 1 + i % (1 << n));
        let be = perturbed_density_encoding(&rho, p, &s.child("enc", 0))?;
        let eps = 0.5f64.powi(2 * n as i32);
        let pi = sv_projector(&extract_block(&be)?, eps);
        let mass = (&pi * rho.matrix()).trace().re;
        w.push(1.0 - mass, 2f64.powi(n as i32 - p as i32 + 1) + 2f64.powi(n as i32) * eps);
    }
    Ok(w.outcome())
}

/// `||Pi_{>=eps} psi|| <= 2^{-p} / eps` for `psi` in the kernel of `rho`.
pub fn perturbed_kernel_leak(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let instances = param_usize(params, "instances", 50)?;
    let max_n = param_usize(params, "max_n", 4)?;
    let mut w = Worst::new(1.0);
    for i in 0..instances {
        let n = 1 + i % max_n.max(1);
        let d = 1usize << n;
        let p = 4 * n;
        let s = seed.child("inst", i as u64);
        let rank = 1 + i % (d - 1).max(1);
        let rho = random_density(&mut s.child("rho", 0).rng(), n, rank);
        let e = crate::linalg::hermitian_eigen(rho.matrix());
        let kernel: Vec<usize> = (0..d).filter(|&j| e.values[j] < 1e-12).collect();
        if kernel.is_empty() {
            return Err(QsepError::Numerical("random low-rank state has no kernel".into()));
        }
        let coeffs = haar_state_with(&mut s.child("psi", 0).rng(), kernel.len()).into_amplitudes();
        let mut psi = ComplexVector::zeros(d);
        for (k, &j) in kernel.iter().enumerate() {
            psi += e.vectors.column(j) * coeffs[k];
        }
        let be = perturbed_density_encoding(&rho, p, &s.child("enc", 0))?;
        let eps = 0.5f64.powi(3 * n as i32);
        let pi = sv_projector(&extract_block(&be)?, eps);
        w.push((&pi * &psi).norm(), 0.5f64.powi(p as i32) / eps);
    }
    Ok(w.outcome())
}

/// `(A ⊗ I)|Omega_in> = sqrt(out/in) (I ⊗ A^T)|Omega_out>` on random isometries.
pub fn transpose_identity(params: &Params, seed: &SeedPath) -> Result<CheckOutcome> {
    let instances = param_usize(params, "instances", 50)?;
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut rng = seed.child("iso", i as u64).rng();
        let q_in = rng.gen_range(0..=3usize);
        let q_out = rng.gen_range(q_in..=5usize);
        let u = haar_unitary_with(&mut rng, 1usize << q_out);
        worst = worst.max(transpose_identity_residual(&isometry_columns(u.matrix(), q_out - q_in)));
    }
    Ok(CheckOutcome::ratio_check(worst, EXACT_TOL, 1.0).with("instances", instances as f64))
}
