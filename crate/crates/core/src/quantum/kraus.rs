//! Quantum instruments in Kraus form, the post-measurement state update,
//! and Choi-matrix complete-positivity checks.

use num_complex::Complex64;

use crate::instrument::EVENT_PROBABILITY_FLOOR;
use crate::quantum::matrix::CMatrix;
use crate::quantum::povm::Povm;
use crate::quantum::state::DensityMatrix;
use crate::space::{Event, FiniteSpace};
use crate::{tolerance, Error, Result};

/// Per outcome a list of Kraus operators `A_{w,j}` (all `d_out x d_in`),
/// trace-preserving overall: `sum_{w,j} A* A = I`.
#[derive(Debug, Clone)]
pub struct KrausInstrument {
    outcome_space: FiniteSpace,
    kraus: Vec<Vec<CMatrix>>,
    d_in: usize,
    d_out: usize,
}

impl KrausInstrument {
    pub fn new(outcome_space: FiniteSpace, kraus: Vec<Vec<CMatrix>>) -> Result<Self> {
        if kraus.len() != outcome_space.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} Kraus lists for {} outcomes",
                kraus.len(),
                outcome_space.size()
            )));
        }
        let first =
            kraus.iter().flatten().next().ok_or_else(|| {
                Error::InvalidArgument("instrument has no Kraus operators".into())
            })?;
        let (d_out, d_in) = (first.rows(), first.cols());
        let mut total = CMatrix::zeros(d_in, d_in);
        for (w, ops) in kraus.iter().enumerate() {
            for op in ops {
                if op.rows() != d_out || op.cols() != d_in {
                    return Err(Error::DimensionMismatch(format!(
                        "operator for outcome `{}` is {}x{}, expected {d_out}x{d_in}",
                        outcome_space.label(w),
                        op.rows(),
                        op.cols()
                    )));
                }
                total = &total + &op.adjoint().matmul(op)?;
            }
        }
        if total.max_abs_diff(&CMatrix::identity(d_in)) > tolerance() {
            return Err(Error::InvalidArgument(format!(
                "instrument is not trace preserving: sum of A*A deviates from identity by {:.3e}",
                total.max_abs_diff(&CMatrix::identity(d_in))
            )));
        }
        Ok(Self {
            outcome_space,
            kraus,
            d_in,
            d_out,
        })
    }

    /// Projective instrument measuring the standard basis of dimension `d`.
    pub fn projective(d: usize) -> Result<Self> {
        let space = FiniteSpace::indexed("m", d)?;
        let ops = (0..d)
            .map(|k| {
                let mut p = CMatrix::zeros(d, d);
                p.set(k, k, Complex64::ONE);
                vec![p]
            })
            .collect();
        Self::new(space, ops)
    }

    /// Single-outcome instrument applying a unitary.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        let space = FiniteSpace::new(["u"])?;
        Self::new(space, vec![vec![u]])
    }

    pub fn outcome_space(&self) -> &FiniteSpace {
        &self.outcome_space
    }

    pub fn kraus_operators(&self, outcome: usize) -> &[CMatrix] {
        &self.kraus[outcome]
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// The measurement statistics of the instrument: effects
    /// `M(w) = sum_j A*_{w,j} A_{w,j}`.
    pub fn induced_povm(&self) -> Result<Povm> {
        let effects = self
            .kraus
            .iter()
            .map(|ops| {
                let mut e = CMatrix::zeros(self.d_in, self.d_in);
                for op in ops {
                    e = &e + &op.adjoint().matmul(op)?;
                }
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::new(self.outcome_space.clone(), effects)
    }

    /// Unnormalized post-measurement operator
    /// `T' = sum_{w in event, j} A rho A*`.
    pub fn apply_unnormalized(&self, event: &Event, rho: &DensityMatrix) -> Result<CMatrix> {
        self.outcome_space
            .expect_same(event.space(), "apply_unnormalized")?;
        if rho.dim() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} with instrument input dimension {}",
                rho.dim(),
                self.d_in
            )));
        }
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for w in event.indices() {
            for op in &self.kraus[w] {
                let t = op.matmul(rho.matrix())?.matmul(&op.adjoint())?;
                out = &out + &t;
            }
        }
        Ok(out)
    }

    /// Conditional state update: returns the event probability and the
    /// normalized post-measurement density matrix.
    pub fn state_update(&self, event: &Event, rho: &DensityMatrix) -> Result<(f64, DensityMatrix)> {
        let unnormalized = self.apply_unnormalized(event, rho)?;
        let probability = unnormalized.trace().re;
        if probability <= EVENT_PROBABILITY_FLOOR {
            return Err(Error::ZeroProbabilityEvent { probability });
        }
        let state = unnormalized.scale(Complex64::new(1.0 / probability, 0.0));
        // positive and trace-one by construction; symmetrize away the
        // floating-point skew before wrapping
        Ok((probability, DensityMatrix::from_valid(state.hermitized())))
    }

    /// Choi matrix of the operation at one outcome, column-stacking
    /// convention: `C = sum_j vec(A_j) vec(A_j)*`. Positive semidefinite by
    /// construction; its eigenvalues certify complete positivity.
    pub fn choi_matrix(&self, outcome: usize) -> Result<CMatrix> {
        self.outcome_space.check_index(outcome)?;
        let n = self.d_in * self.d_out;
        let mut c = CMatrix::zeros(n, n);
        for op in &self.kraus[outcome] {
            let v = op.vectorize();
            c = &c + &CMatrix::outer(&v, &v);
        }
        Ok(c)
    }
}

/// Choi matrix of an arbitrary linear operation given as a superoperator
/// matrix `S` (size `d_out^2 x d_in^2`) acting on column-stacked matrices.
/// Unlike the Kraus route this need not be positive; a negative eigenvalue
/// witnesses a map that is not completely positive.
pub fn choi_of_superoperator(s: &CMatrix, d_in: usize, d_out: usize) -> Result<CMatrix> {
    if s.rows() != d_out * d_out || s.cols() != d_in * d_in {
        return Err(Error::DimensionMismatch(format!(
            "superoperator is {}x{}, expected {}x{}",
            s.rows(),
            s.cols(),
            d_out * d_out,
            d_in * d_in
        )));
    }
    let n = d_in * d_out;
    let mut c = CMatrix::zeros(n, n);
    for i in 0..d_in {
        for j in 0..d_in {
            // image of the matrix unit E_ij, read back from column stacking
            let col = j * d_in + i;
            for a in 0..d_out {
                for b in 0..d_out {
                    let value = s.get(b * d_out + a, col);
                    c.set(i * d_out + a, j * d_out + b, value);
                }
            }
        }
    }
    Ok(c)
}

/// Superoperator matrix of the transpose map in dimension `d`
/// (column-stacking convention). The canonical not-completely-positive
/// witness.
pub fn transpose_superoperator(d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d * d, d * d);
    for r in 0..d {
        for c in 0..d {
            // vec(X^T)[c*d + r] = vec(X)[r*d + c]
            s.set(c * d + r, r * d + c, Complex64::ONE);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::eig::hermitian_eigenvalues;
    use crate::quantum::EIGEN_TOLERANCE;
    use crate::testing;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> DensityMatrix {
        DensityMatrix::pure(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    #[test]
    fn lueders_update_of_plus() {
        let instr = KrausInstrument::projective(2).unwrap();
        let event = Event::singleton(instr.outcome_space().clone(), 0).unwrap();
        // oracle: 2x2 arithmetic, P0 |+><+| P0 = 0.5 |0><0|
        let (p, rho) = instr.state_update(&event, &plus()).unwrap();
        assert!((p - 0.5).abs() <= 1e-12);
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(rho.max_abs_diff(&zero) <= 1e-12);
    }

    #[test]
    fn unitary_instrument_conjugates() {
        let hadamard = CMatrix::from_rows(vec![
            vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
            vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
        ])
        .unwrap();
        let instr = KrausInstrument::unitary(hadamard.clone()).unwrap();
        let rho = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let full = Event::full(instr.outcome_space().clone());
        let (p, out) = instr.state_update(&full, &rho).unwrap();
        assert!((p - 1.0).abs() <= 1e-12);
        let expected = hadamard
            .matmul(rho.matrix())
            .unwrap()
            .matmul(&hadamard.adjoint())
            .unwrap();
        assert!(out.matrix().max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn identity_instrument_is_neutral() {
        let instr = KrausInstrument::unitary(CMatrix::identity(3)).unwrap();
        let mut rng = testing::seeded_rng(8);
        let rho = testing::random_density_matrix(&mut rng, 3);
        let full = Event::full(instr.outcome_space().clone());
        let (p, out) = instr.state_update(&full, &rho).unwrap();
        assert!((p - 1.0).abs() <= 1e-12);
        assert!(out.max_abs_diff(&rho) <= 1e-12);
    }

    #[test]
    fn zero_probability_update_is_an_error() {
        let instr = KrausInstrument::projective(2).unwrap();
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let event = Event::singleton(instr.outcome_space().clone(), 1).unwrap();
        assert!(matches!(
            instr.state_update(&event, &zero),
            Err(Error::ZeroProbabilityEvent { .. })
        ));
    }

    #[test]
    fn induced_povm_reproduces_born_statistics() {
        let instr = KrausInstrument::projective(2).unwrap();
        let povm = instr.induced_povm().unwrap();
        let p = povm.outcome_probabilities(&plus()).unwrap();
        assert!((p[0] - 0.5).abs() <= 1e-12);
        assert!((p[1] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn choi_of_identity_channel() {
        let instr = KrausInstrument::unitary(CMatrix::identity(2)).unwrap();
        let choi = instr.choi_matrix(0).unwrap();
        let eigen = hermitian_eigenvalues(&choi).unwrap();
        // maximally entangled projector scaled by the dimension
        let expected = [0.0, 0.0, 0.0, 2.0];
        for (got, want) in eigen.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12);
        }
        assert!((choi.trace().re - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn choi_of_depolarizing_channel() {
        // four Pauli Kraus operators at weight 1/2 send everything to I/2
        let h = 0.5;
        let ops = vec![
            CMatrix::identity(2).scale(c(h, 0.0)),
            CMatrix::from_rows(vec![
                vec![c(0.0, 0.0), c(h, 0.0)],
                vec![c(h, 0.0), c(0.0, 0.0)],
            ])
            .unwrap(),
            CMatrix::from_rows(vec![
                vec![c(0.0, 0.0), c(0.0, -h)],
                vec![c(0.0, h), c(0.0, 0.0)],
            ])
            .unwrap(),
            CMatrix::from_rows(vec![
                vec![c(h, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(-h, 0.0)],
            ])
            .unwrap(),
        ];
        let space = FiniteSpace::new(["noise"]).unwrap();
        let instr = KrausInstrument::new(space, vec![ops]).unwrap();
        let choi = instr.choi_matrix(0).unwrap();
        // direct vec-sum computation gives I/2
        assert!(choi.max_abs_diff(&CMatrix::identity(4).scale(c(0.5, 0.0))) <= 1e-12);
        for lambda in hermitian_eigenvalues(&choi).unwrap() {
            assert!((lambda - 0.5).abs() <= 1e-12);
        }
        // and the channel output really is I/2
        let mut rng = testing::seeded_rng(12);
        let rho = testing::random_density_matrix(&mut rng, 2);
        let full = Event::full(instr.outcome_space().clone());
        let (_, out) = instr.state_update(&full, &rho).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(&CMatrix::identity(2).scale(c(0.5, 0.0)))
                <= 1e-12
        );
    }

    #[test]
    fn transpose_map_is_not_completely_positive() {
        let s = transpose_superoperator(2);
        let choi = choi_of_superoperator(&s, 2, 2).unwrap();
        let eigen = hermitian_eigenvalues(&choi).unwrap();
        assert!((eigen[0] + 1.0).abs() <= 1e-6);
        // while every Kraus-built Choi matrix stays PSD
        let mut rng = testing::seeded_rng(13);
        for _ in 0..10 {
            let instr = testing::random_kraus_instrument(&mut rng, 3, 2, 2);
            for w in 0..2 {
                let min = hermitian_eigenvalues(&instr.choi_matrix(w).unwrap()).unwrap()[0];
                assert!(min >= -EIGEN_TOLERANCE);
            }
        }
    }

    #[test]
    fn choi_routes_agree_on_kraus_channels() {
        // superoperator of a channel: S = sum_j conj(A_j) kron A_j
        let mut rng = testing::seeded_rng(14);
        let instr = testing::random_kraus_instrument(&mut rng, 2, 1, 2);
        let mut s = CMatrix::zeros(4, 4);
        for op in instr.kraus_operators(0) {
            let conj = op.transpose().adjoint(); // entrywise conjugate
            s = &s + &conj.kron(op);
        }
        let via_super = choi_of_superoperator(&s, 2, 2).unwrap();
        let via_kraus = instr.choi_matrix(0).unwrap();
        assert!(via_super.max_abs_diff(&via_kraus) <= 1e-12);
    }

    #[test]
    fn trace_preservation_over_random_states() {
        let mut rng = testing::seeded_rng(15);
        let instr = testing::random_kraus_instrument(&mut rng, 3, 3, 2);
        for _ in 0..100 {
            let rho = testing::random_density_matrix(&mut rng, 3);
            let mut total = 0.0;
            for w in 0..instr.outcome_space().size() {
                let event = Event::singleton(instr.outcome_space().clone(), w).unwrap();
                total += instr.apply_unnormalized(&event, &rho).unwrap().trace().re;
            }
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }
}
