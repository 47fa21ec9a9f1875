//! Threshold polynomials for singular-value discrimination.
//!
//! The target is the even smoothed step
//! `g(x) = 1 + erf(kappa (x - theta)) / 2 - erf(kappa (x + theta)) / 2`
//! with `theta = (a + b) / 2`, which is below `eta / 4` on `[0, a]` and above
//! `1 - eta / 4` on `[b, 1]`. Its Chebyshev coefficients come from a DCT of
//! samples at Chebyshev nodes; the truncation degree doubles until a grid
//! check passes, and the truncated series is affinely renormalized into
//! `[0, 1]`.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc_inv};

use crate::error::{QsepError, Result};

/// Constant in the degree bound `ceil(C_DEG / (b - a) * ln(4 / eta))`.
pub const C_DEG: f64 = 8.0;
/// Grid resolution used by the invariant checks.
pub const GRID_POINTS: usize = 10_000;
/// Floating-point slack on the `[0, 1]` range check.
const ROUNDING: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoly {
    /// Chebyshev coefficients `c_0..c_degree` of the unnormalized series.
    pub coefficients: Vec<f64>,
    pub degree: usize,
    pub low: f64,
    pub high: f64,
    pub eta: f64,
    /// Affine renormalization `p = (q - shift) / scale`.
    pub shift: f64,
    pub scale: f64,
}

pub fn degree_bound(a: f64, b: f64, eta: f64) -> usize {
    (C_DEG / (b - a) * (4.0 / eta).ln()).ceil() as usize
}

/// Clenshaw evaluation of `sum_j c_j T_j(x)`.
pub fn chebyshev_eval(coefs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coefs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + coefs.first().cloned().unwrap_or(0.0)
}

/// Chebyshev coefficients of `f` from `nodes` Chebyshev points of the first
/// kind, computed with a DCT-II realized as a length-`2 nodes` FFT.
pub fn chebyshev_coefficients(f: impl Fn(f64) -> f64, nodes: usize) -> Vec<f64> {
    let n = nodes;
    let pi = std::f64::consts::PI;
    let samples: Vec<f64> = (0..n).map(|k| f((pi * (k as f64 + 0.5) / n as f64).cos())).collect();
    let mut buf: Vec<Complex<f64>> = samples.iter().chain(samples.iter().rev()).map(|&x| Complex::new(x, 0.0)).collect();
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(2 * n);
    fft.process(&mut buf);
    (0..n)
        .map(|j| {
            let tw = Complex::from_polar(1.0, -pi * j as f64 / (2.0 * n as f64));
            let dct = 0.5 * (tw * buf[j]).re;
            let c = 2.0 * dct / n as f64;
            if j == 0 {
                c / 2.0
            } else {
                c
            }
        })
        .collect()
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
}

/// Every point visited by the grid checks, plus the edges.
fn check_points(a: f64, b: f64) -> impl Iterator<Item = f64> {
    grid(-1.0, 1.0, 2 * GRID_POINTS).chain(grid(0.0, a, GRID_POINTS)).chain(grid(b, 1.0, GRID_POINTS)).chain([a, b, 0.0, 1.0])
}

impl ThresholdPoly {
    pub fn eval(&self, x: f64) -> f64 {
        (chebyshev_eval(&self.coefficients, x) - self.shift) / self.scale
    }

    /// Largest violation of the grid invariants (zero when all hold).
    pub fn grid_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in grid(-1.0, 1.0, 2 * GRID_POINTS) {
            let p = self.eval(x);
            worst = worst.max(-p - ROUNDING).max(p - 1.0 - ROUNDING);
        }
        for x in grid(0.0, self.low, GRID_POINTS) {
            worst = worst.max(self.eval(x).abs() - self.eta);
        }
        for x in grid(self.high, 1.0, GRID_POINTS) {
            worst = worst.max((1.0 - self.eta) - self.eval(x));
        }
        worst.max(0.0)
    }
}

fn truncated(coefs: &[f64], degree: usize, a: f64, b: f64, eta: f64) -> ThresholdPoly {
    let c: Vec<f64> = coefs.iter().take(degree + 1).cloned().collect();
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 1.0;
    for x in check_points(a, b) {
        let q = chebyshev_eval(&c, x);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    ThresholdPoly { coefficients: c, degree, low: a, high: b, eta, shift: lo, scale: hi - lo }
}

/// Smallest doubling degree (capped by the degree bound) whose truncation
/// satisfies every grid invariant.
pub fn threshold_poly(a: f64, b: f64, eta: f64) -> Result<ThresholdPoly> {
    if !(0.0..1.0).contains(&a) || !(b > a && b <= 1.0) {
        return Err(QsepError::InvalidInput(format!("need 0 <= a < b <= 1, got a = {a}, b = {b}")));
    }
    if b - a < 1e-12 {
        return Err(QsepError::InvalidInput("gap b - a is degenerate".into()));
    }
    if !(eta > 0.0 && eta < 0.5) {
        return Err(QsepError::InvalidInput(format!("eta = {eta} must lie in (0, 1/2)")));
    }
    let theta = 0.5 * (a + b);
    let kappa = erfc_inv(eta / 4.0) / (0.5 * (b - a));
    let g = move |x: f64| 1.0 + 0.5 * erf(kappa * (x - theta)) - 0.5 * erf(kappa * (x + theta));
    let cap = degree_bound(a, b, eta);
    let nodes = (4 * cap).next_power_of_two().max(64);
    let coefs = chebyshev_coefficients(g, nodes);
    let mut degree = 8;
    loop {
        let d = degree.min(cap);
        let poly = truncated(&coefs, d, a, b, eta);
        if poly.grid_violation() == 0.0 {
            return Ok(poly);
        }
        if d == cap {
            return Err(QsepError::Numerical(format!("no admissible truncation up to degree {cap}")));
        }
        degree *= 2;
    }
}
