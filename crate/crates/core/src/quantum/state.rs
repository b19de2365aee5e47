//! Quantum states: density matrices and finite frames of pure states.

use num_complex::Complex64;

use crate::quantum::eig::hermitian_eigenvalues;
use crate::quantum::matrix::{inner, vector_norm, CMatrix};
use crate::quantum::EIGEN_TOLERANCE;
use crate::space::FiniteSpace;
use crate::{tolerance, Error, Result};

/// Overlap threshold identifying two pure states up to global phase.
pub const PHASE_TOLERANCE: f64 = 1e-10;

/// A positive-semidefinite, trace-one Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace at the library tolerance and
    /// eigenvalue nonnegativity at the eigensolver tolerance.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density matrix",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let tol = tolerance();
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvalidArgument(
                "density matrix is not Hermitian".into(),
            ));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let min = hermitian_eigenvalues(&matrix)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -EIGEN_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "density matrix has eigenvalue {min}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Projector onto a pure state (the input is normalized first).
    pub fn pure(state: &[Complex64]) -> Result<Self> {
        let norm = vector_norm(state);
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let unit: Vec<Complex64> = state.iter().map(|&z| z / norm).collect();
        Ok(Self {
            matrix: CMatrix::outer(&unit, &unit),
        })
    }

    /// Convex mixture of density matrices.
    pub fn mixture(states: &[DensityMatrix], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::BadConvexWeights("mixture arity mismatch".into()));
        }
        let d = states[0].dim();
        let mut m = CMatrix::zeros(d, d);
        for (state, &w) in states.iter().zip(weights) {
            if w < -tolerance() {
                return Err(Error::BadConvexWeights(format!("weight {w}")));
            }
            m = &m + &state.matrix.scale(Complex64::new(w.max(0.0), 0.0));
        }
        Self::new(m)
    }

    pub(crate) fn from_valid(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

/// A finite list of pairwise-distinct unit vectors, standing in for the
/// continuum of pure states as a finite information space. The payload of
/// point `k` is the rank-one projector onto the `k`-th vector.
#[derive(Debug, Clone)]
pub struct PureStateFrame {
    space: FiniteSpace,
    dimension: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl PureStateFrame {
    pub fn new<S: Into<String>>(labels: Vec<S>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if vectors.is_empty() || labels.len() != vectors.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} frame vectors",
                labels.len(),
                vectors.len()
            )));
        }
        let space = FiniteSpace::new(labels)?;
        let dimension = vectors[0].len();
        let tol = tolerance();
        for (k, v) in vectors.iter().enumerate() {
            if v.len() != dimension {
                return Err(Error::DimensionMismatch(format!(
                    "frame vector {k} has length {}, expected {dimension}",
                    v.len()
                )));
            }
            if (vector_norm(v) - 1.0).abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "frame vector `{}` is not normalized",
                    space.label(k)
                )));
            }
        }
        for j in 0..vectors.len() {
            for k in (j + 1)..vectors.len() {
                if inner(&vectors[j], &vectors[k]).norm() >= 1.0 - tol {
                    return Err(Error::DuplicateLabel(format!(
                        "frame vectors `{}` and `{}` coincide up to phase",
                        space.label(j),
                        space.label(k)
                    )));
                }
            }
        }
        Ok(Self {
            space,
            dimension,
            vectors,
        })
    }

    /// Frame with automatic labels `psi0`, `psi1`, ...
    pub fn from_vectors(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let labels: Vec<String> = (0..vectors.len()).map(|i| format!("psi{i}")).collect();
        Self::new(labels, vectors)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vector(&self, k: usize) -> &[Complex64] {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// Rank-one projector payload of frame point `k`.
    pub fn projector(&self, k: usize) -> CMatrix {
        CMatrix::outer(&self.vectors[k], &self.vectors[k])
    }

    /// Index of a frame member equal to `state` up to global phase.
    pub fn position_of(&self, state: &[Complex64]) -> Option<usize> {
        self.vectors
            .iter()
            .position(|v| inner(v, state).norm() >= 1.0 - PHASE_TOLERANCE)
    }
}
