//! Statevector kernel: gathers the amplitudes addressed by a wire list,
//! transforms them and scatters them back.
//!
//! On an `n`-qubit register wire `w` is bit `n - 1 - w` of the basis index.
//! Inside a wire list, `wires[0]` is the most significant local bit.

use super::types::{ComplexMatrix, C64};
use crate::error::{QsepError, Result};

/// Offsets of the `2^k` local basis states relative to a base index.
pub fn local_offsets(n_qubits: usize, wires: &[usize]) -> Vec<usize> {
    let k = wires.len();
    (0..(1usize << k))
        .map(|l| {
            let mut off = 0usize;
            for (j, &w) in wires.iter().enumerate() {
                if (l >> (k - 1 - j)) & 1 == 1 {
                    off |= 1usize << (n_qubits - 1 - w);
                }
            }
            off
        })
        .collect()
}

/// Base indices: all indices whose bits on `wires` are zero.
pub fn base_indices(n_qubits: usize, wires: &[usize]) -> Vec<usize> {
    let mut positions: Vec<usize> = wires.iter().map(|&w| n_qubits - 1 - w).collect();
    positions.sort_unstable();
    let count = 1usize << (n_qubits - wires.len());
    (0..count)
        .map(|mut x| {
            for &p in &positions {
                x = ((x >> p) << (p + 1)) | (x & ((1usize << p) - 1));
            }
            x
        })
        .collect()
}

pub fn check_wires(n_qubits: usize, wires: &[usize]) -> Result<()> {
    let mut seen = vec![false; n_qubits];
    for &w in wires {
        if w >= n_qubits {
            return Err(QsepError::Dimension(format!("wire {w} outside register of {n_qubits} qubits")));
        }
        if seen[w] {
            return Err(QsepError::Dimension(format!("wire {w} repeated")));
        }
        seen[w] = true;
    }
    Ok(())
}

/// Calls `f` on every local block of amplitudes addressed by `wires`.
pub fn apply_local(
    state: &mut [C64],
    n_qubits: usize,
    wires: &[usize],
    mut f: impl FnMut(&mut [C64]),
) -> Result<()> {
    if state.len() != 1usize << n_qubits {
        return Err(QsepError::Dimension(format!(
            "state length {} does not match {n_qubits} qubits",
            state.len()
        )));
    }
    check_wires(n_qubits, wires)?;
    let offsets = local_offsets(n_qubits, wires);
    let mut local = vec![C64::new(0.0, 0.0); offsets.len()];
    for base in base_indices(n_qubits, wires) {
        for (slot, &off) in local.iter_mut().zip(&offsets) {
            *slot = state[base + off];
        }
        f(&mut local);
        for (slot, &off) in local.iter().zip(&offsets) {
            state[base + off] = *slot;
        }
    }
    Ok(())
}

/// Applies a `2^k x 2^k` gate to `wires`.
pub fn apply_gate(state: &mut [C64], n_qubits: usize, gate: &ComplexMatrix, wires: &[usize]) -> Result<()> {
    let dim = 1usize << wires.len();
    if gate.nrows() != dim || gate.ncols() != dim {
        return Err(QsepError::Dimension(format!(
            "gate is {}x{} but acts on {} wires",
            gate.nrows(),
            gate.ncols(),
            wires.len()
        )));
    }
    let mut out = vec![C64::new(0.0, 0.0); dim];
    apply_local(state, n_qubits, wires, |local| {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (cidx, &a) in local.iter().enumerate() {
                acc += gate[(r, cidx)] * a;
            }
            *o = acc;
        }
        local.copy_from_slice(&out);
    })
}

/// Lifts a gate on `wires` to a full `2^n x 2^n` matrix.
pub fn embed_gate(n_qubits: usize, gate: &ComplexMatrix, wires: &[usize]) -> Result<ComplexMatrix> {
    let dim = 1usize << n_qubits;
    let mut m = ComplexMatrix::identity(dim, dim);
    for col in 0..dim {
        let mut column: Vec<C64> = m.column(col).iter().cloned().collect();
        apply_gate(&mut column, n_qubits, gate, wires)?;
        m.set_column(col, &nalgebra::DVector::from_vec(column));
    }
    Ok(m)
}
