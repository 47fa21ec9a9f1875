//! Lemma-check records and the dispatch table.
//!
//! Every check reduces to a measured left-hand side, a bound term and their
//! ratio. Big-O statements pass when the worst ratio stays below a
//! calibrated constant; exact identities use the bound slot for their
//! tolerance and a calibration of 1.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::checks;
use crate::budget::Budget;
use crate::error::{QsepError, Result};
use crate::haar::SeedPath;

/// Named numeric parameters of a check.
pub type Params = BTreeMap<String, f64>;

/// Every id the dispatcher accepts, in suite order.
pub const LEMMA_IDS: &[&str] = &[
    "L2.1", "L2.2", "L2.3", "L2.5", "L2.10", "L2.12", "T2.9", "L4.3", "L4.4", "L4.5", "L5.6", "L5.8", "L5.10", "L5.11", "C6.8",
    "L6.11", "L6.12", "L7.12", "Eq153", "Eq68-choi-norm",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckResult {
    pub lemma_id: String,
    pub params: Params,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub calibration: f64,
    pub pass: bool,
    pub seed: SeedPath,
    pub runtime_ms: u64,
    /// Diagnostics beyond the headline comparison (instance counts,
    /// violation counts, values at a doubled size, ...).
    pub details: BTreeMap<String, f64>,
}

/// Outcome of a check before it is stamped with id, seed and runtime.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub lhs: f64,
    pub bound: f64,
    pub calibration: f64,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
}

impl CheckOutcome {
    /// `lhs <= calibration * bound`.
    pub fn ratio_check(lhs: f64, bound: f64, calibration: f64) -> Self {
        CheckOutcome { lhs, bound, calibration, pass: within(lhs, bound, calibration), details: BTreeMap::new() }
    }

    /// `|lhs - target| <= tol`, reported with the target in the bound slot.
    pub fn equality_check(lhs: f64, target: f64, tol: f64) -> Self {
        let mut details = BTreeMap::new();
        details.insert("abs_error".into(), (lhs - target).abs());
        details.insert("tolerance".into(), tol);
        CheckOutcome { lhs, bound: target, calibration: 1.0, pass: (lhs - target).abs() <= tol, details }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// Relative round-off allowance on `lhs <= C * bound`, needed where the
/// inequality is tight (pure states in gentle measurement, for instance).
pub const ROUNDING_SLACK: f64 = 1e-9;

pub fn within(lhs: f64, bound: f64, calibration: f64) -> bool {
    lhs <= calibration * bound * (1.0 + ROUNDING_SLACK) + f64::EPSILON
}

pub fn ratio(lhs: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        lhs / bound
    } else if lhs <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Worst instance of a family of `lhs <= C * bound` comparisons.
#[derive(Clone, Debug, Default)]
pub struct Worst {
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub instances: usize,
    pub violations: usize,
    calibration: f64,
}

impl Worst {
    pub fn new(calibration: f64) -> Self {
        Worst { calibration, ..Default::default() }
    }

    pub fn push(&mut self, lhs: f64, bound: f64) {
        let r = ratio(lhs, bound);
        if self.instances == 0 || r > self.ratio {
            self.lhs = lhs;
            self.bound = bound;
            self.ratio = r;
        }
        if !within(lhs, bound, self.calibration) {
            self.violations += 1;
        }
        self.instances += 1;
    }

    pub fn outcome(&self) -> CheckOutcome {
        CheckOutcome::ratio_check(self.lhs, self.bound, self.calibration)
            .with("instances", self.instances as f64)
            .with("violations", self.violations as f64)
    }
}

pub fn param(params: &Params, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Reads a nonnegative integer parameter, rejecting fractional values.
pub fn param_usize(params: &Params, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(&v) if v >= 0.0 && v.fract() == 0.0 && v < 1e15 => Ok(v as usize),
        Some(&v) => Err(QsepError::Usage(format!("parameter {key} must be a nonnegative integer, got {v}"))),
    }
}

/// Runs the check named `id`.
pub fn lemma_check(id: &str, params: &Params, seed: &SeedPath, budget: &Budget, timing: bool) -> Result<LemmaCheckResult> {
    let start = Instant::now();
    let s = seed.child(id, 0);
    let out = match id {
        "L2.1" => checks::gentle_measurement(params, &s)?,
        "L2.2" => checks::holder(params, &s)?,
        "L2.3" => checks::lipschitz_frobenius(params, &s)?,
        "L2.5" => checks::state_distance_vs_unitary(params, &s)?,
        "L2.10" => checks::symmetric_moment_mc(params, &s, budget)?,
        "L2.12" => checks::haar_choi_vs_moment(params, budget)?,
        "T2.9" => checks::concentration(params, &s)?,
        "L4.3" => checks::game_mean_advantage(params, &s)?,
        "L4.4" => checks::lipschitz_l2_sum(params, &s)?,
        "L4.5" => checks::game_exceedance(params, &s)?,
        "L5.6" => checks::swap_call_deletion(params, &s, budget)?,
        "L5.8" => checks::support_bound(params, &s, budget)?,
        "L5.10" => checks::perturbed_support_mass(params, &s)?,
        "L5.11" => checks::perturbed_kernel_leak(params, &s)?,
        "C6.8" => checks::transpose_identity(params, &s)?,
        "L6.11" => checks::isometry_choi_vs_moment(params, budget)?,
        "L6.12" => checks::permutation_twirl(params, &s, budget)?,
        "L7.12" => checks::hri_call_deletion(params, &s, budget)?,
        "Eq153" => checks::hri_trace(params, &s, budget)?,
        "Eq68-choi-norm" => checks::choi_shrinkage(params, &s, budget)?,
        other => return Err(QsepError::Usage(format!("unknown lemma id {other}; known ids: {}", LEMMA_IDS.join(", ")))),
    };
    Ok(LemmaCheckResult {
        lemma_id: id.to_string(),
        params: params.clone(),
        lhs: out.lhs,
        bound: out.bound,
        ratio: ratio(out.lhs, out.bound),
        calibration: out.calibration,
        pass: out.pass,
        seed: s,
        runtime_ms: if timing { start.elapsed().as_millis() as u64 } else { 0 },
        details: out.details,
    })
}
