//! Permutations of tensor copies, permutation operators `R_pi` and the
//! symmetric-subspace projector.
//!
//! A permutation of `ell` elements is stored as its image table: `pi[i]`
//! is the slot that copy `i` is moved to. With this convention
//! `R_pi R_sigma = R_{pi . sigma}` and
//! `R_pi |x_1..x_ell> = |x_{pi^-1(1)}..x_{pi^-1(ell)}>`.

use nalgebra::DMatrix;

use super::types::{cr, ComplexMatrix, UnitaryMatrix};
use crate::budget::Budget;
use crate::error::{QsepError, Result};

pub type Perm = Vec<usize>;

/// All permutations of `ell` elements in lexicographic order of their image
/// tables. The identity comes first.
pub fn all_perms(ell: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur: Perm = (0..ell).collect();
    loop {
        out.push(cur.clone());
        // Next lexicographic permutation.
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

pub fn identity_perm(ell: usize) -> Perm {
    (0..ell).collect()
}

pub fn is_perm(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

/// `(p . q)(i) = p(q(i))`.
pub fn compose(p: &[usize], q: &[usize]) -> Perm {
    q.iter().map(|&x| p[x]).collect()
}

pub fn inverse(p: &[usize]) -> Perm {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

pub fn cycle_count(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut cycles = 0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
        }
    }
    cycles
}

/// Index into `all_perms(p.len())`.
pub fn perm_rank(p: &[usize]) -> usize {
    let n = p.len();
    let mut rank = 0;
    let mut fact = (1..n).product::<usize>().max(1);
    let mut rest: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let pos = rest.iter().position(|&x| x == p[i]).unwrap();
        rank += pos * fact;
        rest.remove(pos);
        if n - 1 - i > 0 {
            fact /= n - 1 - i;
        }
    }
    rank
}

/// Image of a basis index of `(C^d)^{⊗ell}` under `R_pi`. Copy 0 is the
/// most significant digit.
pub fn permute_index(pi: &[usize], d: usize, idx: usize) -> usize {
    let ell = pi.len();
    let mut digits = vec![0usize; ell];
    let mut rest = idx;
    for i in (0..ell).rev() {
        digits[i] = rest % d;
        rest /= d;
    }
    let mut out_digits = vec![0usize; ell];
    for i in 0..ell {
        out_digits[pi[i]] = digits[i];
    }
    out_digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Lookup table `idx -> R_pi idx` on `(C^d)^{⊗ell}`.
pub fn permute_table(pi: &[usize], d: usize) -> Vec<usize> {
    let dim = d.pow(pi.len() as u32);
    (0..dim).map(|i| permute_index(pi, d, i)).collect()
}

pub fn permutation_matrix(pi: &[usize], d: usize) -> ComplexMatrix {
    let table = permute_table(pi, d);
    let dim = table.len();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (col, &row) in table.iter().enumerate() {
        m[(row, col)] = cr(1.0);
    }
    m
}

pub fn permutation_operator(pi: &[usize], d: usize, ell: usize) -> Result<UnitaryMatrix> {
    if pi.len() != ell || !is_perm(pi) {
        return Err(QsepError::InvalidInput(format!("{pi:?} is not a permutation of {ell} elements")));
    }
    Ok(UnitaryMatrix::trusted(permutation_matrix(pi, d)))
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

/// `(1/ell!) sum_pi R_pi` on `(C^d)^{⊗ell}`.
pub fn sym_projector(d: usize, ell: usize, budget: &Budget) -> Result<ComplexMatrix> {
    budget.check_twirl(d, ell)?;
    let dim = d.pow(ell as u32);
    let perms = all_perms(ell);
    let w = 1.0 / perms.len() as f64;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for pi in &perms {
        for (col, row) in permute_table(pi, d).into_iter().enumerate() {
            m[(row, col)] += cr(w);
        }
    }
    Ok(m)
}

/// Gram matrix `G[pi, sigma] = Tr[R_pi^dagger R_sigma] = d^{#cycles(pi^-1 sigma)}`.
pub fn gram_matrix(d: f64, perms: &[Perm]) -> DMatrix<f64> {
    let k = perms.len();
    DMatrix::from_fn(k, k, |a, b| d.powi(cycle_count(&compose(&inverse(&perms[a]), &perms[b])) as i32))
}

/// Moore-Penrose pseudo-inverse of a real symmetric matrix with relative
/// eigenvalue cutoff `1e-10`.
pub fn symmetric_pinv(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = g.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cut = 1e-10 * max;
    let mut out = DMatrix::zeros(g.nrows(), g.ncols());
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > cut {
            let v = eig.eigenvectors.column(i);
            out += (v * v.transpose()) / lam;
        }
    }
    out
}

/// Weingarten-style pseudo-inverse of the Gram matrix of `S_ell` at dimension `d`.
pub fn weingarten_matrix(d: f64, ell: usize) -> DMatrix<f64> {
    symmetric_pinv(&gram_matrix(d, &all_perms(ell)))
}
