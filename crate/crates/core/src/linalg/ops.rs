//! Tensor products, partial traces, Schatten norms, spectral helpers and
//! channel distances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use super::random::gaussian_vector;
use super::types::*;
use crate::error::{QsepError, Result};

/// Default relative cutoff for [`support_projector`].
pub const SUPPORT_TAU: f64 = 1e-10;
/// Default number of sampled inputs for [`diamond_distance_lb`].
pub const DIAMOND_LB_TRIALS: usize = 2000;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// decreasing order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen { values: vec![], vectors: ComplexMatrix::zeros(0, 0) };
    }
    let sym = (m + m.adjoint()) * cr(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    HermitianEigen { values, vectors }
}

/// Rebuilds `V diag(values) V^dagger`.
pub fn from_eigen(vectors: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    scaled * vectors.adjoint()
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let eig = hermitian_eigen(m);
    let vals: Vec<f64> = eig.values.iter().map(|&x| f(x)).collect();
    from_eigen(&eig.vectors, &vals)
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> ComplexMatrix {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().cloned().unwrap_or(0.0)
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Trace norm. Hermitian inputs use the eigenvalues, others the singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_square() && hermitian_defect(m) <= 1e-12 * (1.0 + frobenius_norm(m)) {
        hermitian_eigen(m).values.iter().map(|x| x.abs()).sum()
    } else {
        singular_values(m).iter().sum()
    }
}

/// Schatten p-norm order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Schatten {
    One,
    Two,
    Inf,
}

pub fn schatten_norm(a: &ComplexMatrix, p: Schatten) -> f64 {
    match p {
        Schatten::One => trace_norm(a),
        Schatten::Two => frobenius_norm(a),
        Schatten::Inf => operator_norm(a),
    }
}

/// Kronecker product with `a`'s indices most significant.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_all(ms: &[ComplexMatrix]) -> ComplexMatrix {
    ms.iter().fold(ComplexMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
}

/// Splits every basis index of a register with subsystem sizes `dims`
/// (in qubits) into a kept index and a traced index.
fn split_tables(dims: &[usize], keep: &[usize]) -> (usize, usize, Vec<usize>) {
    let kept_bits: usize = keep.iter().map(|&i| dims[i]).sum();
    let total: usize = dims.iter().sum();
    let traced_bits = total - kept_bits;
    let mut offsets = Vec::with_capacity(dims.len());
    let mut acc = total;
    for &q in dims {
        acc -= q;
        offsets.push(acc);
    }
    // For every (kept, traced) pair the full index.
    let dk = 1usize << kept_bits;
    let dt = 1usize << traced_bits;
    let mut full = vec![0usize; dk * dt];
    for (idx, slot) in (0..(dk * dt)).zip(full.iter_mut()) {
        let k = idx / dt;
        let t = idx % dt;
        let mut kbits = kept_bits;
        let mut tbits = traced_bits;
        let mut out = 0usize;
        for (s, &q) in dims.iter().enumerate() {
            let mask = (1usize << q) - 1;
            let val = if keep.contains(&s) {
                kbits -= q;
                (k >> kbits) & mask
            } else {
                tbits -= q;
                (t >> tbits) & mask
            };
            out |= val << offsets[s];
        }
        *slot = out;
    }
    (dk, dt, full)
}

fn validate_subsystems(total_qubits: usize, dims: &[usize], keep: &[usize]) -> Result<()> {
    let sum: usize = dims.iter().sum();
    if sum != total_qubits {
        return Err(QsepError::Dimension(format!(
            "subsystem qubits sum to {sum}, register has {total_qubits}"
        )));
    }
    let mut seen = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || seen[k] {
            return Err(QsepError::Dimension(format!("invalid kept subsystem {k}")));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Partial trace of a square matrix over all subsystems not listed in
/// `keep`. Kept subsystems appear in ascending order of their index.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(QsepError::Dimension("partial trace needs a square matrix".into()));
    }
    let q = qubits_of(m.nrows())?;
    validate_subsystems(q, dims, keep)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let (dk, dt, full) = split_tables(dims, &keep_sorted);
    let mut out = ComplexMatrix::zeros(dk, dk);
    for k1 in 0..dk {
        for k2 in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += m[(full[k1 * dt + t], full[k2 * dt + t])];
            }
            out[(k1, k2)] = acc;
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(rho.matrix(), dims, keep)?;
    Ok(DensityMatrix::trusted((&m + m.adjoint()) * cr(0.5)))
}

/// Reduced density matrix of a pure state, computed from amplitudes
/// without forming the full projector.
pub fn reduced_from_vector(v: &ComplexVector, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let q = qubits_of(v.len())?;
    validate_subsystems(q, dims, keep)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let (dk, dt, full) = split_tables(dims, &keep_sorted);
    let mut psi = ComplexMatrix::zeros(dk, dt);
    for k in 0..dk {
        for t in 0..dt {
            psi[(k, t)] = v[full[k * dt + t]];
        }
    }
    Ok(&psi * psi.adjoint())
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QsepError::Dimension(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    Ok(0.5 * trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// `sqrt(1 - |<a|b>|^2)` for normalized vectors.
pub fn pure_trace_distance(a: &ComplexVector, b: &ComplexVector) -> f64 {
    (1.0 - a.dotc(b).norm_sqr()).max(0.0).sqrt()
}

/// `|Omega_d> = d^{-1/2} sum_x |x>|x>` on a `d*d`-dimensional register.
pub fn max_entangled_vector(d: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d * d);
    let amp = cr(1.0 / (d as f64).sqrt());
    for x in 0..d {
        v[x * d + x] = amp;
    }
    v
}

pub fn max_entangled(d: usize) -> Result<PureState> {
    if d == 0 || !d.is_power_of_two() {
        return Err(QsepError::InvalidInput(format!("maximally entangled state needs a power-of-two d, got {d}")));
    }
    Ok(PureState::trusted(max_entangled_vector(d)))
}

/// Eigenphases of a unitary in `(-pi, pi]`.
pub fn eigenphases(w: &ComplexMatrix) -> Vec<f64> {
    if let Some(ev) = w.clone().try_schur(1e-15, 5_000).and_then(|s| s.eigenvalues()) {
        let ok = ev.iter().all(|z| (z.norm() - 1.0).abs() < 1e-6);
        if ok {
            return ev.iter().map(|z| z.arg()).collect();
        }
    }
    // Joint diagonalization of the commuting Hermitian and anti-Hermitian parts.
    let h = (w + w.adjoint()) * cr(0.5);
    let k = (w - w.adjoint()) * c(0.0, -0.5);
    let mix = &h + &k * cr(0.618_033_988_749_895);
    let eig = hermitian_eigen(&mix);
    (0..w.nrows())
        .map(|j| {
            let v = eig.vectors.column(j);
            v.dotc(&(w * v)).arg()
        })
        .collect()
}

/// Smallest arc length of the unit circle containing all given phases.
pub fn phase_arc(phases: &[f64]) -> f64 {
    if phases.len() <= 1 {
        return 0.0;
    }
    let mut p: Vec<f64> = phases.iter().map(|x| x.rem_euclid(std::f64::consts::TAU)).collect();
    p.sort_by(f64::total_cmp);
    let mut gap = p[0] + std::f64::consts::TAU - p[p.len() - 1];
    for w in p.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    std::f64::consts::TAU - gap
}

/// Exact diamond distance between the channels `U . U^dagger` and `V . V^dagger`.
pub fn diamond_distance_unitary(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(QsepError::Dimension(format!("{} vs {}", u.dim(), v.dim())));
    }
    let w = u.matrix().adjoint() * v.matrix();
    let arc = phase_arc(&eigenphases(&w));
    if arc >= std::f64::consts::PI {
        return Ok(2.0);
    }
    Ok((2.0 * (arc / 2.0).sin()).clamp(0.0, 2.0))
}

/// Output of `(channel ⊗ id)` on a pure input of the doubled space.
fn doubled_output(ch: &ChannelRep, input: &ComplexVector) -> Result<ComplexMatrix> {
    let d = ch.input_dim();
    let v = ch.isometry();
    let total = ch.total_qubits();
    let out_q = ch.output_qubits();
    let in_q = ch.input_qubits();
    // Reshape |phi> into d x d, apply V on the first factor.
    let phi = DMatrix::from_fn(d, d, |i, j| input[i * d + j]);
    let vphi = &v * phi;
    let flat = DVector::from_fn(vphi.nrows() * d, |idx, _| vphi[(idx / d, idx % d)]);
    reduced_from_vector(&flat, &[out_q, total - out_q, in_q], &[0, 2])
}

/// Sampled lower bound on the diamond distance: the running maximum of the
/// output trace distance over random pure inputs on the doubled space.
pub fn diamond_distance_lb<R: Rng + ?Sized>(a: &ChannelRep, b: &ChannelRep, trials: usize, rng: &mut R) -> Result<f64> {
    if a.input_dim() != b.input_dim() || a.output_qubits() != b.output_qubits() {
        return Err(QsepError::Dimension("channels have different shapes".into()));
    }
    let d = a.input_dim();
    let mut best = 0.0f64;
    for _ in 0..trials {
        let g = gaussian_vector(rng, d * d);
        let g = &g / cr(g.norm());
        let oa = doubled_output(a, &g)?;
        let ob = doubled_output(b, &g)?;
        best = best.max(0.5 * trace_norm(&(oa - ob)));
    }
    Ok(best.min(1.0) * 2.0)
}

/// Normalized Choi state `(channel ⊗ id)(|Omega><Omega|)`.
pub fn choi_state(ch: &ChannelRep) -> Result<ComplexMatrix> {
    doubled_output(ch, &max_entangled_vector(ch.input_dim()))
}

/// Upper bound `D * ||J_a - J_b||_1` on the diamond distance from
/// normalized Choi states.
pub fn diamond_distance_ub_choi(a: &ChannelRep, b: &ChannelRep) -> Result<f64> {
    let ja = choi_state(a)?;
    let jb = choi_state(b)?;
    if ja.nrows() != jb.nrows() {
        return Err(QsepError::Dimension("channels have different shapes".into()));
    }
    Ok((a.input_dim() as f64 * trace_norm(&(ja - jb))).min(2.0))
}

/// Projector onto eigenvectors of `rho` with eigenvalue above `tau * lambda_max`.
pub fn support_projector_matrix(rho: &ComplexMatrix, tau: f64) -> Result<ComplexMatrix> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(QsepError::InvalidInput(format!("cutoff {tau} outside (0, 1)")));
    }
    let eig = hermitian_eigen(rho);
    let n = rho.nrows();
    let max = eig.values.first().cloned().unwrap_or(0.0);
    if max <= 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let keep: Vec<usize> = (0..n).filter(|&i| eig.values[i] > tau * max).collect();
    let v = eig.vectors.select_columns(keep.iter());
    Ok(&v * v.adjoint())
}

pub fn support_projector(rho: &DensityMatrix, tau: f64) -> Result<ComplexMatrix> {
    support_projector_matrix(rho.matrix(), tau)
}

/// Post-measurement state `sqrt(M) rho sqrt(M) / Tr[M rho]` and its trace
/// distance to `rho`.
pub fn gentle_residual(m: &ComplexMatrix, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    if m.nrows() != rho.dim() || !m.is_square() {
        return Err(QsepError::Dimension("measurement and state dims differ".into()));
    }
    let p = (m * rho.matrix()).trace().re;
    if p <= 1e-15 {
        return Err(QsepError::InvalidInput("measurement outcome has zero probability".into()));
    }
    let s = sqrt_psd(m);
    let post = &s * rho.matrix() * &s / cr(p);
    let post = DensityMatrix::trusted((&post + post.adjoint()) * cr(0.5));
    let dist = trace_distance(&post, rho)?;
    Ok((post, dist))
}

/// Reorders the qubit subsystems of a state vector: output subsystem `j`
/// is input subsystem `order[j]`.
pub fn permute_subsystems_vector(v: &ComplexVector, dims: &[usize], order: &[usize]) -> Result<ComplexVector> {
    let map = subsystem_permutation_map(v.len(), dims, order)?;
    let mut out = ComplexVector::zeros(v.len());
    for (i, &j) in map.iter().enumerate() {
        out[j] = v[i];
    }
    Ok(out)
}

pub fn permute_subsystems_matrix(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    let map = subsystem_permutation_map(m.nrows(), dims, order)?;
    let n = m.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// For every input basis index, the output index after reordering.
fn subsystem_permutation_map(len: usize, dims: &[usize], order: &[usize]) -> Result<Vec<usize>> {
    let q = qubits_of(len)?;
    if dims.iter().sum::<usize>() != q || order.len() != dims.len() {
        return Err(QsepError::Dimension("subsystem layout mismatch".into()));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &o)| i != o) {
        return Err(QsepError::InvalidInput("order is not a permutation".into()));
    }
    let mut in_off = vec![0usize; dims.len()];
    let mut acc = q;
    for (s, &d) in dims.iter().enumerate() {
        acc -= d;
        in_off[s] = acc;
    }
    let mut out_off = vec![0usize; dims.len()];
    let mut acc = q;
    for &s in order {
        acc -= dims[s];
        out_off[s] = acc;
    }
    Ok((0..len)
        .map(|i| {
            let mut j = 0usize;
            for s in 0..dims.len() {
                let val = (i >> in_off[s]) & ((1usize << dims[s]) - 1);
                j |= val << out_off[s];
            }
            j
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn pauli_x() -> ComplexMatrix {
        DMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
    }

    fn pauli_z() -> ComplexMatrix {
        DMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
    }

    fn rand_matrix(rng: &mut ChaCha20Rng, r: usize, c: usize) -> ComplexMatrix {
        let v = gaussian_vector(rng, r * c);
        DMatrix::from_fn(r, c, |i, j| v[i * c + j])
    }

    #[test]
    fn tensor_identities_and_ordering() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4, 4));
        let xi = tensor(&pauli_x(), &i2);
        let mut e00 = ComplexVector::zeros(4);
        e00[0] = cr(1.0);
        let out = xi * e00;
        assert_abs_diff_eq!(out[2].re, 1.0);
    }

    #[test]
    fn tensor_trace_is_multiplicative() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = rand_matrix(&mut rng, 3, 3);
            let b = rand_matrix(&mut rng, 3, 3);
            let lhs = tensor(&a, &b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_max_entangled_is_mixed() {
        let omega = max_entangled(4).unwrap().to_density();
        for keep in [0usize, 1] {
            let r = partial_trace(&omega, &[2, 2], &[keep]).unwrap();
            assert!(max_abs_diff(r.matrix(), &(ComplexMatrix::identity(4, 4) * cr(0.25))) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let a = rand_matrix(&mut rng, 2, 2);
        let ra = &a * a.adjoint();
        let ra = &ra / ra.trace();
        let b = rand_matrix(&mut rng, 4, 4);
        let rb = &b * b.adjoint();
        let rb = &rb / rb.trace();
        let rho = DensityMatrix::new(tensor(&ra, &rb)).unwrap();
        let red = partial_trace(&rho, &[1, 2], &[0]).unwrap();
        assert!(max_abs_diff(red.matrix(), &ra) < 1e-12);
        let red_b = partial_trace(&rho, &[1, 2], &[1]).unwrap();
        assert!(max_abs_diff(red_b.matrix(), &rb) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_kraus_sum() {
        // W |psi>|0> traced over the second qubit equals sum_j K_j psi psi^dag K_j^dag.
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let g = rand_matrix(&mut rng, 8, 8);
        let w = g.qr().q();
        let psi = gaussian_vector(&mut rng, 4);
        let psi = &psi / cr(psi.norm());
        let mut input = ComplexVector::zeros(8);
        for x in 0..4 {
            input[x * 2] = psi[x];
        }
        let out = &w * input;
        let rho = DensityMatrix::trusted(&out * out.adjoint());
        let red = partial_trace(&rho, &[2, 1], &[0]).unwrap();
        let mut kraus_sum = ComplexMatrix::zeros(4, 4);
        for j in 0..2 {
            let k = DMatrix::from_fn(4, 4, |a, b| w[(a * 2 + j, b * 2)]);
            let kv = &k * &psi;
            kraus_sum += &kv * kv.adjoint();
        }
        assert!(max_abs_diff(red.matrix(), &kraus_sum) < 1e-12);
        assert_abs_diff_eq!(red.trace(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn schatten_basic_values() {
        assert_abs_diff_eq!(schatten_norm(&ComplexMatrix::identity(4, 4), Schatten::One), 4.0, epsilon = 1e-12);
        let mut e01 = ComplexMatrix::zeros(2, 2);
        e01[(0, 1)] = cr(1.0);
        assert_abs_diff_eq!(schatten_norm(&e01, Schatten::Two), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(schatten_norm(&e01, Schatten::One), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn holder_and_norm_ordering() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = rand_matrix(&mut rng, 4, 4);
            let b = rand_matrix(&mut rng, 4, 4);
            let lhs = schatten_norm(&(&a * &b), Schatten::One);
            let rhs = schatten_norm(&a, Schatten::One) * schatten_norm(&b, Schatten::Inf);
            assert!(lhs <= rhs * (1.0 + 1e-12));
            let (n1, n2, ni) = (
                schatten_norm(&a, Schatten::One),
                schatten_norm(&a, Schatten::Two),
                schatten_norm(&a, Schatten::Inf),
            );
            assert!(ni <= n2 * (1.0 + 1e-12) && n2 <= n1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn trace_distance_values() {
        let z0 = PureState::basis(1, 0).unwrap().to_density();
        let z1 = PureState::basis(1, 1).unwrap().to_density();
        let plus = PureState::normalized(DVector::from_vec(vec![cr(1.0), cr(1.0)])).unwrap().to_density();
        assert_abs_diff_eq!(trace_distance(&z0, &z0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&z0, &z1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&z0, &plus).unwrap(), 0.5f64.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn trace_distance_is_max_over_projectors() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = rand_matrix(&mut rng, 4, 4);
            let b = rand_matrix(&mut rng, 4, 4);
            let ra = &a * a.adjoint();
            let rb = &b * b.adjoint();
            let ra = DensityMatrix::new(&ra / ra.trace()).unwrap();
            let rb = DensityMatrix::new(&rb / rb.trace()).unwrap();
            let diff = ra.matrix() - rb.matrix();
            let eig = hermitian_eigen(&diff);
            let pos: Vec<usize> = (0..4).filter(|&i| eig.values[i] > 0.0).collect();
            let v = eig.vectors.select_columns(pos.iter());
            let p = &v * v.adjoint();
            let best = (p * &diff).trace().re;
            assert_abs_diff_eq!(best, trace_distance(&ra, &rb).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn max_entangled_norm_identity() {
        let omega = max_entangled(2).unwrap();
        let s = 0.5f64.sqrt();
        assert_abs_diff_eq!(omega.amplitudes()[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(omega.amplitudes()[3].re, s, epsilon = 1e-15);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let a = rand_matrix(&mut rng, 8, 8);
        let v = tensor(&a, &ComplexMatrix::identity(8, 8)) * max_entangled_vector(8);
        let rhs = (a.adjoint() * &a).trace().re / 8.0;
        assert_abs_diff_eq!(v.norm_squared(), rhs, epsilon = 1e-10);
    }

    #[test]
    fn diamond_unitary_values() {
        let i = UnitaryMatrix::identity(2);
        let phase = UnitaryMatrix::new(ComplexMatrix::identity(2, 2) * c(0.3f64.cos(), 0.3f64.sin())).unwrap();
        let z = UnitaryMatrix::new(pauli_z()).unwrap();
        assert_abs_diff_eq!(diamond_distance_unitary(&i, &i).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(diamond_distance_unitary(&i, &phase).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(diamond_distance_unitary(&i, &z).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn diamond_i_vs_z_matches_grid_search() {
        // Maximize the output trace distance over a grid of doubled-space inputs.
        let z = pauli_z();
        let mut best = 0.0f64;
        let steps = 60;
        for a in 0..=steps {
            let th = std::f64::consts::PI * a as f64 / steps as f64;
            let (c0, c1) = ((th / 2.0).cos(), (th / 2.0).sin());
            let v = DVector::from_vec(vec![cr(c0), cr(0.0), cr(0.0), cr(c1)]);
            let w = tensor(&z, &ComplexMatrix::identity(2, 2)) * &v;
            best = best.max(2.0 * pure_trace_distance(&v, &w));
        }
        assert_abs_diff_eq!(best, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn diamond_lb_is_below_exact_and_monotone() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let u = rand_matrix(&mut rng, 4, 4).qr().q();
        let v = rand_matrix(&mut rng, 4, 4).qr().q();
        let (u, v) = (UnitaryMatrix::new(u).unwrap(), UnitaryMatrix::new(v).unwrap());
        let exact = diamond_distance_unitary(&u, &v).unwrap();
        let (cu, cv) = (ChannelRep::unitary(u.clone()), ChannelRep::unitary(v));
        let same = diamond_distance_lb(&cu, &ChannelRep::unitary(u), 20, &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        assert!(same < 1e-9);
        let mut prev = 0.0;
        for trials in [10, 50, 200] {
            let lb = diamond_distance_lb(&cu, &cv, trials, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
            assert!(lb <= exact + 1e-9);
            assert!(lb >= prev - 1e-15);
            prev = lb;
        }
        assert!(diamond_distance_ub_choi(&cu, &cv).unwrap() >= exact - 1e-9);
    }

    #[test]
    fn support_projector_examples() {
        let psi = PureState::basis(2, 1).unwrap();
        let p = support_projector(&psi.to_density(), SUPPORT_TAU).unwrap();
        assert!(max_abs_diff(&p, psi.to_density().matrix()) < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        let p = support_projector(&mixed, SUPPORT_TAU).unwrap();
        assert!(max_abs_diff(&p, &ComplexMatrix::identity(4, 4)) < 1e-12);
        let mut half = ComplexMatrix::zeros(4, 4);
        half[(0, 0)] = cr(0.5);
        half[(1, 1)] = cr(0.5);
        let p = support_projector(&DensityMatrix::new(half).unwrap(), SUPPORT_TAU).unwrap();
        assert_abs_diff_eq!(p.trace().re, 2.0, epsilon = 1e-12);
        assert!(support_projector_matrix(&ComplexMatrix::zeros(2, 2), SUPPORT_TAU).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gentle_residual_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let a = rand_matrix(&mut rng, 4, 4);
        let r = &a * a.adjoint();
        let rho = DensityMatrix::new(&r / r.trace()).unwrap();
        let (post, d) = gentle_residual(&ComplexMatrix::identity(4, 4), &rho).unwrap();
        assert!(d < 1e-10 && max_abs_diff(post.matrix(), rho.matrix()) < 1e-10);
        let q = support_projector(&rho, SUPPORT_TAU).unwrap();
        let (_, d) = gentle_residual(&q, &rho).unwrap();
        assert!(d < 1e-9);
        let zero = ComplexMatrix::zeros(4, 4);
        assert!(gentle_residual(&zero, &rho).is_err());
    }

    #[test]
    fn permute_subsystems_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let v = gaussian_vector(&mut rng, 32);
        let dims = [1, 2, 2];
        let w = permute_subsystems_vector(&v, &dims, &[2, 0, 1]).unwrap();
        let back = permute_subsystems_vector(&w, &[2, 1, 2], &[1, 2, 0]).unwrap();
        assert!((back - v).norm() < 1e-14);
    }
}
