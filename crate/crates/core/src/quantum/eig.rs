//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation removes the phase of the pivot entry and then applies the
//! classical symmetric Jacobi rotation, so only real diagonals and a real
//! pivot magnitude enter the angle computation. Quadratic convergence makes
//! a handful of sweeps enough at the matrix sizes used here (d <= 64).

use num_complex::Complex64;

use crate::quantum::matrix::CMatrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and eigenvectors (matching columns) of a
/// Hermitian matrix. The input is symmetrized before iterating, so entries
/// may deviate from exact Hermitian symmetry at floating-point scale.
pub fn hermitian_eigen(matrix: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix has no eigendecomposition",
            matrix.rows(),
            matrix.cols()
        )));
    }
    if !matrix.is_hermitian(1e-8 * matrix.frobenius_norm().max(1.0)) {
        return Err(Error::InvalidArgument("matrix is not Hermitian".into()));
    }
    let n = matrix.rows();
    let mut a = matrix.hermitized();
    let mut vectors = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);
    let target = 1e-14 * scale;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut vectors, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut sorted_vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            sorted_vectors.set(r, dst, vectors.get(r, src));
        }
    }
    Ok((eigenvalues, sorted_vectors))
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(matrix: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(matrix).map(|(values, _)| values)
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * a.get(p, q).norm_sqr();
        }
    }
    sum.sqrt()
}

fn rotate(a: &mut CMatrix, vectors: &mut CMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b; // a[p][q] = b * phase
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let sc = s * phase.conj(); // complex part of the rotation column p

    let n = a.rows();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        let new_rp = c * arp - sc * arq;
        let new_rq = s * arp + c * phase.conj() * arq;
        a.set(r, p, new_rp);
        a.set(p, r, new_rp.conj());
        a.set(r, q, new_rq);
        a.set(q, r, new_rq.conj());
    }
    let new_pp = c * c * app - 2.0 * s * c * b + s * s * aqq;
    let new_qq = s * s * app + 2.0 * s * c * b + c * c * aqq;
    a.set(p, p, Complex64::new(new_pp, 0.0));
    a.set(q, q, Complex64::new(new_qq, 0.0));
    a.set(p, q, Complex64::ZERO);
    a.set(q, p, Complex64::ZERO);

    for r in 0..n {
        let vrp = vectors.get(r, p);
        let vrq = vectors.get(r, q);
        vectors.set(r, p, c * vrp - sc * vrq);
        vectors.set(r, q, s * vrp + c * phase.conj() * vrq);
    }
}
