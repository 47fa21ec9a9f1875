//! Simulation budget table.
//!
//! Every allocation that scales exponentially in a qubit count is checked
//! against this table first so that oversized requests fail fast with a
//! sizing error instead of exhausting memory.

use serde::{Deserialize, Serialize};

use crate::error::{QsepError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest register simulated as a dense state or operator.
    pub max_total_qubits: usize,
    /// Largest `d^ell` handled by the exact twirl.
    pub max_twirl_dim: usize,
    /// Largest `n` for which a swap oracle `S_n` is materialized densely.
    pub max_dense_oracle_n: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_total_qubits: 14, max_twirl_dim: 1 << 12, max_dense_oracle_n: 5 }
    }
}

impl Budget {
    pub fn check_qubits(&self, what: &str, qubits: usize) -> Result<()> {
        if qubits > self.max_total_qubits {
            return Err(QsepError::Sizing(format!(
                "{what} needs {qubits} qubits, budget is {}",
                self.max_total_qubits
            )));
        }
        Ok(())
    }

    pub fn check_twirl(&self, d: usize, ell: usize) -> Result<()> {
        let dim = checked_pow(d, ell)
            .ok_or_else(|| QsepError::Sizing(format!("twirl dimension {d}^{ell} overflows")))?;
        if dim > self.max_twirl_dim {
            return Err(QsepError::Sizing(format!(
                "twirl dimension {d}^{ell} = {dim} exceeds budget {}",
                self.max_twirl_dim
            )));
        }
        Ok(())
    }

    pub fn check_dense_oracle(&self, n: usize) -> Result<()> {
        if n > self.max_dense_oracle_n {
            return Err(QsepError::Sizing(format!(
                "dense oracle on n = {n} exceeds budget n <= {}",
                self.max_dense_oracle_n
            )));
        }
        Ok(())
    }
}

pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
