//! The PRFSG security game at toy scale: a fixed two-query distinguisher,
//! its advantage per oracle draw, the concentration bound it is compared
//! against, and the Lipschitz check on `S~_n(U)`.
//!
//! The distinguisher works on `[k* (lambda), x (lambda), flag, reg (2 lambda)]`.
//! It prepares `|k*>|x0>|0>|0>`, queries the first oracle on `[x, flag, reg]`,
//! queries `S_{2 lambda}` on every wire and outputs 1 when the flag is `|0>`.
//! On the keyed side this returns 1 with certainty when `k = k*`.

use serde::{Deserialize, Serialize};

use super::prfsg::SwapTable;
use super::swap::SwapOracleFamily;
use crate::error::{QsepError, Result};
use crate::haar::{haar_state_with, haar_unitary_with, SeedPath};
use crate::linalg::sim::apply_gate;
use crate::linalg::{ComplexMatrix, PureState, UnitaryMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyDistinguisher {
    pub lambda: usize,
    pub k_star: u64,
    pub x0: u64,
}

impl ToyDistinguisher {
    pub fn new(lambda: usize) -> Self {
        ToyDistinguisher { lambda, k_star: 0, x0: 0 }
    }

    pub fn queries(&self) -> usize {
        2
    }

    /// Acceptance probability with `first` answering the first-oracle query.
    pub fn accept(&self, first: &SwapTable, fam: &SwapOracleFamily) -> Result<f64> {
        let l = self.lambda;
        let n = 2 * l;
        let q = 2 * n + 1;
        let mut state = vec![C64::new(0.0, 0.0); 1usize << q];
        let m = ((self.k_star << l) | self.x0) as usize;
        state[m << (n + 1)] = C64::new(1.0, 0.0);
        let first_wires: Vec<usize> = (l..q).collect();
        first.apply(&mut state, q, &first_wires)?;
        let all: Vec<usize> = (0..q).collect();
        fam.apply_call(n, &mut state, q, &all)?;
        let flag_bit = 1usize << n;
        Ok(state.iter().enumerate().filter(|(i, _)| i & flag_bit == 0).map(|(_, z)| z.norm_sqr()).sum())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameDraw {
    pub keyed_accept: f64,
    pub ideal_accept: f64,
    pub advantage: f64,
}

/// Advantage on one oracle draw. The keyed side averages exactly over all
/// `2^lambda` keys; the ideal side averages over `ideal_samples` Haar tables.
pub fn game_advantage(dist: &ToyDistinguisher, fam: &SwapOracleFamily, ideal_samples: usize, seed: &SeedPath) -> Result<GameDraw> {
    let l = dist.lambda;
    let keys = 1u64 << l;
    let mut keyed = 0.0;
    for k in 0..keys {
        keyed += dist.accept(&SwapTable::keyed_slice(fam, l, k)?, fam)?;
    }
    keyed /= keys as f64;
    if ideal_samples == 0 {
        return Err(QsepError::InvalidInput("ideal side needs at least one sample".into()));
    }
    let mut ideal = 0.0;
    for i in 0..ideal_samples {
        let mut rng = seed.child("theta", i as u64).rng();
        let states = (0..keys).map(|_| haar_state_with(&mut rng, 1usize << (2 * l))).collect();
        ideal += dist.accept(&SwapTable::new(2 * l, states)?, fam)?;
    }
    ideal /= ideal_samples as f64;
    Ok(GameDraw { keyed_accept: keyed, ideal_accept: ideal, advantage: keyed - ideal })
}

/// Right-hand side of the concentration bound
/// `2 exp(-(2^{2 lambda} - 2)(p - c T^2 2^{-lambda})^2 / (6144 T^2))`, capped at 1.
/// Returns `None` when `p < c T^2 / 2^lambda`, where the bound does not apply.
pub fn concentration_bound(lambda: usize, queries: usize, c: f64, p: f64) -> Option<f64> {
    let t = queries as f64;
    let shift = c * t * t / 2f64.powi(lambda as i32);
    if p < shift {
        return None;
    }
    let d = 4f64.powi(lambda as i32) - 2.0;
    Some((2.0 * (-(d * (p - shift).powi(2)) / (6144.0 * t * t)).exp()).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub draws: usize,
    pub mean_advantage: f64,
    pub mean_bound: f64,
    pub threshold: f64,
    pub exceedance: f64,
    pub concentration_bound: Option<f64>,
    pub advantages: Vec<f64>,
}

/// Runs the game over `draws` independent oracle families.
pub fn run_game(lambda: usize, draws: usize, ideal_samples: usize, c: f64, seed: &SeedPath) -> Result<GameSummary> {
    let dist = ToyDistinguisher::new(lambda);
    let advantages = (0..draws)
        .map(|i| {
            let s = seed.child("draw", i as u64);
            let fam = SwapOracleFamily::new(s.child("oracle", 0));
            game_advantage(&dist, &fam, ideal_samples, &s.child("ideal", 0)).map(|g| g.advantage)
        })
        .collect::<Result<Vec<_>>>()?;
    let t = dist.queries() as f64;
    let threshold = 2f64.powf(-(lambda as f64) / 2.0);
    let exceed = advantages.iter().filter(|a| a.abs() >= threshold).count();
    Ok(GameSummary {
        draws,
        mean_advantage: advantages.iter().sum::<f64>() / draws.max(1) as f64,
        mean_bound: c * t * t / 2f64.powi(lambda as i32),
        threshold,
        exceedance: exceed as f64 / draws.max(1) as f64,
        concentration_bound: concentration_bound(lambda, dist.queries(), c, threshold),
        advantages,
    })
}

/// A fixed `T`-query algorithm on `S~_n(U)`: Haar gates on `2n + 1` qubits
/// between oracle calls, acceptance on the first qubit being `|1>`.
#[derive(Clone, Debug)]
pub struct LipschitzProbe {
    pub n: usize,
    pub gates: Vec<UnitaryMatrix>,
}

impl LipschitzProbe {
    pub fn new(n: usize, queries: usize, seed: &SeedPath) -> Self {
        let dim = 2usize << (2 * n);
        let gates = (0..=queries).map(|j| haar_unitary_with(&mut seed.child("gate", j as u64).rng(), dim)).collect();
        LipschitzProbe { n, gates }
    }

    pub fn queries(&self) -> usize {
        self.gates.len() - 1
    }

    /// `f(U) = Pr[1]` with `S~_n(U)` built from `psi_m = U_m |0^n>`.
    pub fn f(&self, us: &[UnitaryMatrix]) -> Result<f64> {
        let n = self.n;
        let states = us
            .iter()
            .map(|u| PureState::new(u.matrix().column(0).into_owned()))
            .collect::<Result<Vec<_>>>()?;
        let table = SwapTable::new(n, states)?;
        let q = 2 * n + 1;
        let wires: Vec<usize> = (0..q).collect();
        let mut state = vec![C64::new(0.0, 0.0); 1usize << q];
        state[0] = C64::new(1.0, 0.0);
        for (j, g) in self.gates.iter().enumerate() {
            if j > 0 {
                table.apply(&mut state, q, &wires)?;
            }
            apply_gate(&mut state, q, g.matrix(), &wires)?;
        }
        let half = state.len() / 2;
        Ok(state[half..].iter().map(|z| z.norm_sqr()).sum())
    }
}

/// `sqrt(sum_m ||U_m - V_m||_2^2)`.
pub fn l2_sum_distance(us: &[UnitaryMatrix], vs: &[UnitaryMatrix]) -> f64 {
    us.iter().zip(vs).map(|(u, v)| (u.matrix() - v.matrix()).norm_squared()).sum::<f64>().sqrt()
}

/// Random unitary `exp(i eps H)` with `H` a normalized GUE sample.
pub fn small_kick(d: usize, eps: f64, seed: &SeedPath) -> UnitaryMatrix {
    let mut rng = seed.rng();
    let g = crate::linalg::random::gaussian_matrix(&mut rng, d, d);
    let h: ComplexMatrix = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let h = &h / C64::new(h.norm().max(1e-300), 0.0);
    let e = crate::linalg::hermitian_eigen(&h);
    let mut w = e.vectors.clone();
    for (j, lam) in e.values.iter().enumerate() {
        let ph = C64::new(0.0, eps * lam).exp();
        for i in 0..d {
            w[(i, j)] *= ph;
        }
    }
    UnitaryMatrix::trusted(w * e.vectors.adjoint())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzSummary {
    pub pairs: usize,
    pub worst_ratio: f64,
    pub violations: usize,
}

/// Compares `|f(U) - f(V)|` with `8 T sqrt(sum ||U_m - V_m||_2^2)` on
/// `pairs` draws. Half the pairs are independent, half are small kicks.
pub fn lipschitz_check(n: usize, queries: usize, pairs: usize, seed: &SeedPath) -> Result<LipschitzSummary> {
    let probe = LipschitzProbe::new(n, queries, &seed.child("probe", 0));
    let d = 1usize << n;
    let count = 1usize << n;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for i in 0..pairs {
        let s = seed.child("pair", i as u64);
        let us: Vec<UnitaryMatrix> = (0..count).map(|m| haar_unitary_with(&mut s.child("u", m as u64).rng(), d)).collect();
        let vs: Vec<UnitaryMatrix> = if i % 2 == 0 {
            (0..count).map(|m| haar_unitary_with(&mut s.child("v", m as u64).rng(), d)).collect()
        } else {
            let eps = 10f64.powf(-1.0 - 3.0 * (i as f64 / pairs as f64));
            us.iter().enumerate().map(|(m, u)| u.mul(&small_kick(d, eps, &s.child("kick", m as u64)))).collect::<Result<Vec<_>>>()?
        };
        let lhs = (probe.f(&us)? - probe.f(&vs)?).abs();
        let rhs = 8.0 * probe.queries() as f64 * l2_sum_distance(&us, &vs);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
        if lhs > rhs + 1e-12 {
            violations += 1;
        }
    }
    Ok(LipschitzSummary { pairs, worst_ratio: worst, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_side_accepts_matching_key() {
        let fam = SwapOracleFamily::new(SeedPath::new(21));
        let dist = ToyDistinguisher::new(2);
        let a = dist.accept(&SwapTable::keyed_slice(&fam, 2, 0).unwrap(), &fam).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_draw_advantage_near_expectation() {
        let fam = SwapOracleFamily::new(SeedPath::new(22));
        let g = game_advantage(&ToyDistinguisher::new(2), &fam, 256, &SeedPath::new(23)).unwrap();
        // 2^-lambda (1 - 2^{-2 lambda}) = 0.234375 on average over draws.
        assert!((g.advantage - 0.234375).abs() < 0.15, "{g:?}");
        assert!((g.ideal_accept - 1.0 / 16.0).abs() < 0.03);
    }

    #[test]
    fn bound_shape() {
        assert!(concentration_bound(2, 2, 1.0, 0.5).is_none());
        let b = concentration_bound(2, 2, 0.25, 0.5).unwrap();
        assert!(b > 0.99 && b <= 1.0);
        let far = concentration_bound(12, 1, 0.0, 0.5).unwrap();
        assert!(far < 1e-6);
    }

    #[test]
    fn lipschitz_holds_on_small_instances() {
        let s = lipschitz_check(1, 2, 20, &SeedPath::new(24)).unwrap();
        assert_eq!(s.violations, 0);
        assert!(s.worst_ratio < 1.0);
    }
}
