//! The PRFSG construction `G(k, x) = |psi_{2 lambda,(k,x)}>` and swap
//! oracles controlled by an explicit table of target states.

use nalgebra::DVector;

use super::swap::{bits_to_index, swap_in_place, SwapOracleFamily};
use crate::error::{QsepError, Result};
use crate::linalg::sim::apply_local;
use crate::linalg::{PureState, UnitaryMatrix, C64};

/// Evaluates the PRFSG: queries `|(k,x)>|0>|0^{2 lambda}>` to `S_{2 lambda}`
/// and keeps the last register. The classical `(k, x)` register is left in
/// a basis state and the flag ends in `|1>`, so the kept state is pure.
pub fn prfsg_eval(fam: &SwapOracleFamily, lambda: usize, k: &[bool], x: &[bool]) -> Result<PureState> {
    if k.len() != lambda || x.len() != lambda {
        return Err(QsepError::InvalidInput(format!("key and input must both have {lambda} bits")));
    }
    let n = 2 * lambda;
    let mut m = k.to_vec();
    m.extend_from_slice(x);
    let mi = bits_to_index(&m) as usize;
    let q = 2 * n + 1;
    let mut state = vec![C64::new(0.0, 0.0); 1usize << q];
    let base = mi << (n + 1);
    state[base] = C64::new(1.0, 0.0);
    let wires: Vec<usize> = (0..q).collect();
    fam.apply_call(n, &mut state, q, &wires)?;
    let flag_one = base + (1usize << n);
    let out = &state[flag_one..flag_one + (1usize << n)];
    let weight: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    if (weight - 1.0).abs() > 1e-10 {
        return Err(QsepError::Numerical(format!("output register carries weight {weight}")));
    }
    Ok(PureState::trusted(DVector::from_column_slice(out)))
}

/// `sum_x |x><x| ⊗ T_{|theta_x>}` for an explicit list of `n`-qubit states,
/// acting on `[x register, flag, n-qubit register]`.
#[derive(Clone, Debug)]
pub struct SwapTable {
    pub n: usize,
    pub states: Vec<PureState>,
}

impl SwapTable {
    pub fn new(n: usize, states: Vec<PureState>) -> Result<Self> {
        if !states.len().is_power_of_two() {
            return Err(QsepError::InvalidInput("table length must be a power of two".into()));
        }
        if states.iter().any(|s| s.qubits() != n) {
            return Err(QsepError::Dimension(format!("every table state must have {n} qubits")));
        }
        Ok(SwapTable { n, states })
    }

    /// `T_{2 lambda, k}`: the rows `x -> |psi_{2 lambda,(k,x)}>` of the family.
    pub fn keyed_slice(fam: &SwapOracleFamily, lambda: usize, k: u64) -> Result<Self> {
        let n = 2 * lambda;
        let states = (0..1u64 << lambda)
            .map(|x| fam.lookup_index(n, (k << lambda) | x).map(|s| (*s).clone()))
            .collect::<Result<Vec<_>>>()?;
        SwapTable::new(n, states)
    }

    pub fn control_qubits(&self) -> usize {
        self.states.len().trailing_zeros() as usize
    }

    pub fn width(&self) -> usize {
        self.control_qubits() + 1 + self.n
    }

    pub fn apply(&self, state: &mut [C64], n_qubits: usize, wires: &[usize]) -> Result<()> {
        if wires.len() != self.width() {
            return Err(QsepError::Dimension(format!("table oracle needs {} wires, got {}", self.width(), wires.len())));
        }
        let block = 2usize << self.n;
        apply_local(state, n_qubits, wires, |local| {
            for (x, chunk) in local.chunks_mut(block).enumerate() {
                swap_in_place(chunk, self.states[x].amplitudes().as_slice());
            }
        })
    }

    pub fn dense(&self) -> UnitaryMatrix {
        let q = self.width();
        let dim = 1usize << q;
        let wires: Vec<usize> = (0..q).collect();
        let mut m = crate::linalg::ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut col = vec![C64::new(0.0, 0.0); dim];
            col[c] = C64::new(1.0, 0.0);
            self.apply(&mut col, q, &wires).expect("wires match the table width");
            for (r, z) in col.iter().enumerate() {
                m[(r, c)] = *z;
            }
        }
        UnitaryMatrix::trusted(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::SeedPath;
    use crate::oracle::swap::{family_lookup, index_to_bits};

    #[test]
    fn prfsg_output_is_family_entry() {
        let fam = SwapOracleFamily::new(SeedPath::new(11));
        for (k, x) in [(0u64, 0u64), (1, 2), (3, 3)] {
            let kb = index_to_bits(k, 2);
            let xb = index_to_bits(x, 2);
            let out = prfsg_eval(&fam, 2, &kb, &xb).unwrap();
            let mut m = kb.clone();
            m.extend(xb);
            assert_eq!(out, family_lookup(&fam, 4, &m).unwrap());
            assert!((out.amplitudes().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distinct_outputs_have_small_mean_overlap() {
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..40 {
            let fam = SwapOracleFamily::new(SeedPath::new(100 + seed));
            let a = prfsg_eval(&fam, 2, &[false, true], &[true, false]).unwrap();
            let b = prfsg_eval(&fam, 2, &[true, true], &[false, false]).unwrap();
            total += a.inner(&b).norm_sqr();
            count += 1;
        }
        let mean = total / count as f64;
        assert!((mean - 1.0 / 16.0).abs() < 0.04, "mean overlap {mean}");
    }

    #[test]
    fn keyed_slice_matches_family_block() {
        let fam = SwapOracleFamily::new(SeedPath::new(12));
        let b = crate::budget::Budget::default();
        let dense = fam.dense_oracle(2, &b).unwrap();
        let table = SwapTable::keyed_slice(&fam, 1, 1).unwrap();
        let t = table.dense();
        // T_{2,k=1} is the lower diagonal block of S_2 (rows with leading m bit 1).
        let half = 16;
        let block = dense.matrix().view((half, half), (half, half)).into_owned();
        assert!((block - t.matrix()).norm() < 1e-12);
    }
}
