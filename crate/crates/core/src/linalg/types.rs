//! Dense numeric carriers: matrices, unitaries, pure states, density matrices
//! and Stinespring channel representations.
//!
//! Basis ordering follows the usual big-endian convention: on an `n`-qubit
//! register, wire 0 is the most significant bit of the basis index.

use nalgebra::{DMatrix, DVector};

use crate::error::{QsepError, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Tolerance for unitarity and Hermiticity checks.
pub const UNITARY_TOL: f64 = 1e-9;
/// Floor below which density eigenvalues are treated as numerical noise.
pub const EIGEN_FLOOR: f64 = -1e-9;
/// Tolerance on the trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Number of qubits of a power-of-two dimension.
pub fn qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QsepError::Dimension(format!("{dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Operator-norm defect `||U^dagger U - I||_inf`.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.ncols();
    let g = m.adjoint() * m - ComplexMatrix::identity(n, n);
    super::ops::operator_norm(&g)
}

/// Square matrix verified to be unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, UNITARY_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QsepError::Dimension(format!(
                "unitary must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !all_finite(&matrix) {
            return Err(QsepError::InvalidInput("unitary has non-finite entries".into()));
        }
        let defect = unitarity_defect(&matrix);
        if defect > tol {
            return Err(QsepError::InvalidInput(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(UnitaryMatrix { matrix })
    }

    /// Wraps a matrix known to be unitary by construction.
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        UnitaryMatrix { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix { matrix: ComplexMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix { matrix: self.matrix.adjoint() }
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != other.dim() {
            return Err(QsepError::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(UnitaryMatrix { matrix: &self.matrix * &other.matrix })
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        &self.matrix * v
    }
}

/// Normalized state vector on a qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    qubits: usize,
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let qubits = qubits_of(amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNITARY_TOL {
            return Err(QsepError::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { qubits, amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(QsepError::InvalidInput("cannot normalize a zero vector".into()));
        }
        PureState::new(amplitudes / cr(norm))
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(QsepError::InvalidInput(format!("basis index {index} out of range {dim}")));
        }
        let mut v = ComplexVector::zeros(dim);
        v[index] = cr(1.0);
        Ok(PureState { qubits, amplitudes: v })
    }

    pub fn zero(qubits: usize) -> Self {
        let mut v = ComplexVector::zeros(1usize << qubits);
        v[0] = cr(1.0);
        PureState { qubits, amplitudes: v }
    }

    pub(crate) fn trusted(amplitudes: ComplexVector) -> Self {
        let qubits = amplitudes.len().trailing_zeros() as usize;
        PureState { qubits, amplitudes }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            qubits: self.qubits + other.qubits,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            qubits: self.qubits,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix on a qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants. Eigenvalues in
    /// `[EIGEN_FLOOR, 0)` are clipped to zero.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QsepError::Dimension("density matrix must be square".into()));
        }
        let qubits = qubits_of(matrix.nrows())?;
        if !all_finite(&matrix) {
            return Err(QsepError::InvalidInput("density matrix has non-finite entries".into()));
        }
        let herm = hermitian_defect(&matrix);
        if herm > UNITARY_TOL {
            return Err(QsepError::InvalidInput(format!("matrix is not Hermitian (defect {herm:.3e})")));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(QsepError::InvalidInput(format!("trace {tr} is not 1")));
        }
        let herm_part = (&matrix + matrix.adjoint()) * cr(0.5);
        let eig = super::ops::hermitian_eigen(&herm_part);
        let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < EIGEN_FLOOR {
            return Err(QsepError::InvalidInput(format!("negative eigenvalue {min:.3e}")));
        }
        let matrix = if min < 0.0 {
            let clipped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
            super::ops::from_eigen(&eig.vectors, &clipped)
        } else {
            herm_part
        };
        Ok(DensityMatrix { qubits, matrix })
    }

    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        let qubits = matrix.nrows().trailing_zeros() as usize;
        DensityMatrix { qubits, matrix }
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let d = 1usize << qubits;
        DensityMatrix {
            qubits,
            matrix: ComplexMatrix::identity(d, d) * cr(1.0 / d as f64),
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            qubits: self.qubits + other.qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// `U rho U^dagger`.
    pub fn conjugate(&self, u: &UnitaryMatrix) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(QsepError::Dimension(format!("{} vs {}", u.dim(), self.dim())));
        }
        Ok(DensityMatrix {
            qubits: self.qubits,
            matrix: u.matrix() * &self.matrix * u.matrix().adjoint(),
        })
    }

    /// `<v| rho |v>`.
    pub fn expect(&self, v: &ComplexVector) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }
}

/// A channel given by a Stinespring dilation: ancillas are prepared in
/// `|0...0>`, the unitary acts on `[input | ancilla]`, and the last
/// `traced_out_qubits` wires are discarded.
#[derive(Clone, Debug)]
pub struct ChannelRep {
    pub stinespring: UnitaryMatrix,
    pub ancilla_in_qubits: usize,
    pub traced_out_qubits: usize,
}

impl ChannelRep {
    pub fn new(stinespring: UnitaryMatrix, ancilla_in_qubits: usize, traced_out_qubits: usize) -> Result<Self> {
        let total = qubits_of(stinespring.dim())?;
        if ancilla_in_qubits > total || traced_out_qubits > total {
            return Err(QsepError::Dimension("ancilla counts exceed dilation size".into()));
        }
        Ok(ChannelRep { stinespring, ancilla_in_qubits, traced_out_qubits })
    }

    pub fn unitary(u: UnitaryMatrix) -> Self {
        ChannelRep { stinespring: u, ancilla_in_qubits: 0, traced_out_qubits: 0 }
    }

    pub fn total_qubits(&self) -> usize {
        self.stinespring.dim().trailing_zeros() as usize
    }

    pub fn input_qubits(&self) -> usize {
        self.total_qubits() - self.ancilla_in_qubits
    }

    pub fn input_dim(&self) -> usize {
        self.stinespring.dim() >> self.ancilla_in_qubits
    }

    pub fn output_qubits(&self) -> usize {
        self.total_qubits() - self.traced_out_qubits
    }

    /// Isometry `V = U (I ⊗ |0^a>)`, mapping the input space into the full
    /// dilation space.
    pub fn isometry(&self) -> ComplexMatrix {
        let stride = 1usize << self.ancilla_in_qubits;
        let cols: Vec<usize> = (0..self.input_dim()).map(|j| j * stride).collect();
        self.stinespring.matrix().select_columns(cols.iter())
    }

    /// Applies the channel to a density matrix on the input register.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.input_dim() {
            return Err(QsepError::Dimension(format!(
                "channel input dim {} vs state dim {}",
                self.input_dim(),
                rho.nrows()
            )));
        }
        let v = self.isometry();
        let full = &v * rho * v.adjoint();
        let total = self.total_qubits();
        let keep = self.output_qubits();
        super::ops::partial_trace_matrix(&full, &[keep, total - keep], &[0])
    }
}
