//! Finite-dimensional quantum systems as embedded information spaces.
//!
//! The information space of a quantum system is a finite frame of pure
//! states; the payload of a frame point is its rank-one projector,
//! flattened to a real vector, with the trace as normalizing functional.
//! Density matrices are the mean states of this embedding, and all
//! measurement statistics factor through them: POVMs give the outcome
//! side, Kraus instruments the state update, and Choi-matrix eigenvalues
//! certify complete positivity. A frame of mixed states would serve as an
//! information space just as well; it is not modeled here.

mod eig;
mod kraus;
mod matrix;
mod povm;
mod state;

pub use eig::{hermitian_eigen, hermitian_eigenvalues};
pub use kraus::{choi_of_superoperator, transpose_superoperator, KrausInstrument};
pub use matrix::CMatrix;
pub use povm::Povm;
pub use state::{DensityMatrix, PureStateFrame, PHASE_TOLERANCE};

use num_complex::Complex64;

use crate::instrument::{ExtendedObservable, EVENT_PROBABILITY_FLOOR};
use crate::mean_state::{EmbeddedSpace, MeanState};
use crate::quantum::matrix::{inner, vector_norm};
use crate::{Error, Result};

/// Eigenvalue nonnegativity tolerance for PSD and Choi checks; looser than
/// the library tolerance to absorb eigensolver noise.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

/// Flattens a complex matrix to real coordinates: row-major entries, each
/// contributing its real and imaginary part.
pub fn flatten_matrix(m: &CMatrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.rows() * m.cols());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m.get(r, c);
            v.push(z.re);
            v.push(z.im);
        }
    }
    v
}

/// Inverse of [`flatten_matrix`] for square matrices of dimension `d`.
pub fn unflatten_matrix(d: usize, v: &[f64]) -> Result<CMatrix> {
    if v.len() != 2 * d * d {
        return Err(Error::ShapeMismatch(format!(
            "{} components for a flattened {d}x{d} complex matrix",
            v.len()
        )));
    }
    let mut m = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let base = 2 * (r * d + c);
            m.set(r, c, Complex64::new(v[base], v[base + 1]));
        }
    }
    Ok(m)
}

/// The trace functional in flattened coordinates: picks the real part of
/// every diagonal entry.
pub fn trace_covector(d: usize) -> Vec<f64> {
    let mut l = vec![0.0; 2 * d * d];
    for r in 0..d {
        l[2 * (r * d + r)] = 1.0;
    }
    l
}

/// Views a pure-state frame as an embedded information space: payloads are
/// flattened projectors, the functional is the flattened trace, and the
/// norm bound is 1 (the Frobenius norm of a rank-one projector).
pub fn to_embedded_space(frame: &PureStateFrame) -> Result<EmbeddedSpace> {
    let d = frame.dimension();
    let payloads = (0..frame.len())
        .map(|k| flatten_matrix(&frame.projector(k)))
        .collect();
    EmbeddedSpace::new(frame.space().clone(), payloads, trace_covector(d), 1.0)
}

/// Mean state of the embedding, read back as a density matrix.
pub fn mean_density_matrix(eta: &MeanState, d: usize) -> Result<DensityMatrix> {
    DensityMatrix::new(unflatten_matrix(d, eta.vector())?.hermitized())
}

/// Restricts a single-Kraus instrument to a pure-state frame, producing the
/// extended observable of the experiment together with the posterior frame.
///
/// For each input state `psi` and outcome `w` with `p = |A_w psi|^2` above
/// the probability floor, the normalized image joins the output frame
/// (deduplicated up to global phase) and receives kernel weight `p`.
/// Instruments with several Kraus operators per outcome produce mixed
/// posteriors, which leave every pure-state frame; those are supported only
/// through the density-matrix update.
pub fn lueders_extended_observable(
    instrument: &KrausInstrument,
    frame_in: &PureStateFrame,
) -> Result<(ExtendedObservable, PureStateFrame)> {
    if instrument.d_in() != frame_in.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "instrument input dimension {} with frame dimension {}",
            instrument.d_in(),
            frame_in.dimension()
        )));
    }
    let outcome_space = instrument.outcome_space().clone();
    for w in 0..outcome_space.size() {
        let count = instrument.kraus_operators(w).len();
        if count != 1 {
            return Err(Error::MultiKrausUnsupported {
                outcome: outcome_space.label(w).to_string(),
                count,
            });
        }
    }

    let mut out_vectors: Vec<Vec<Complex64>> = Vec::new();
    let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
    for k in 0..frame_in.len() {
        for w in 0..outcome_space.size() {
            let op = &instrument.kraus_operators(w)[0];
            let image = op.apply(frame_in.vector(k))?;
            let norm = vector_norm(&image);
            let p = norm * norm;
            if p <= EVENT_PROBABILITY_FLOOR {
                continue;
            }
            let unit: Vec<Complex64> = image.iter().map(|&z| z / norm).collect();
            let position = out_vectors
                .iter()
                .position(|v| inner(v, &unit).norm() >= 1.0 - PHASE_TOLERANCE)
                .unwrap_or_else(|| {
                    out_vectors.push(unit.clone());
                    out_vectors.len() - 1
                });
            entries.push((w, position, k, p));
        }
    }

    let labels: Vec<String> = (0..out_vectors.len()).map(|j| format!("post{j}")).collect();
    let frame_out = PureStateFrame::new(labels, out_vectors)?;

    let mut kernel = vec![vec![vec![0.0; frame_in.len()]; frame_out.len()]; outcome_space.size()];
    for (w, j, k, p) in entries {
        kernel[w][j][k] += p;
    }
    let y = ExtendedObservable::new(
        outcome_space,
        frame_out.space().clone(),
        frame_in.space().clone(),
        kernel,
    )?;
    Ok((y, frame_out))
}
