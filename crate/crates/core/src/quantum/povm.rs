//! Positive operator-valued measures: the outcome side of a quantum
//! measurement. Statistics depend on the prepared ensemble only through its
//! density matrix, by linearity of the trace.

use num_complex::Complex64;

use crate::quantum::eig::hermitian_eigenvalues;
use crate::quantum::matrix::CMatrix;
use crate::quantum::state::DensityMatrix;
use crate::quantum::EIGEN_TOLERANCE;
use crate::space::{Event, FiniteSpace};
use crate::{tolerance, Error, Result};

/// One PSD effect per outcome, summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    outcome_space: FiniteSpace,
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(outcome_space: FiniteSpace, effects: Vec<CMatrix>) -> Result<Self> {
        if effects.len() != outcome_space.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} effects for {} outcomes",
                effects.len(),
                outcome_space.size()
            )));
        }
        let d = effects[0].rows();
        let tol = tolerance();
        let mut sum = CMatrix::zeros(d, d);
        for (w, effect) in effects.iter().enumerate() {
            if !effect.is_square() || effect.rows() != d {
                return Err(Error::DimensionMismatch(format!(
                    "effect `{}` is {}x{}, expected {d}x{d}",
                    outcome_space.label(w),
                    effect.rows(),
                    effect.cols()
                )));
            }
            if !effect.is_hermitian(tol) {
                return Err(Error::InvalidArgument(format!(
                    "effect `{}` is not Hermitian",
                    outcome_space.label(w)
                )));
            }
            let min = hermitian_eigenvalues(effect)?
                .first()
                .copied()
                .unwrap_or(0.0);
            if min < -EIGEN_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "effect `{}` has eigenvalue {min}",
                    outcome_space.label(w)
                )));
            }
            sum = &sum + effect;
        }
        if sum.max_abs_diff(&CMatrix::identity(d)) > tol {
            return Err(Error::NotNormalized {
                column: 0,
                sum: sum.trace().re / d as f64,
            });
        }
        Ok(Self {
            outcome_space,
            effects,
        })
    }

    /// Projective measurement in the standard basis of dimension `d`.
    pub fn computational(d: usize) -> Result<Self> {
        let space = FiniteSpace::indexed("m", d)?;
        let effects = (0..d)
            .map(|k| {
                let mut e = CMatrix::zeros(d, d);
                e.set(k, k, Complex64::ONE);
                e
            })
            .collect();
        Self::new(space, effects)
    }

    pub fn outcome_space(&self) -> &FiniteSpace {
        &self.outcome_space
    }

    pub fn effect(&self, outcome: usize) -> &CMatrix {
        &self.effects[outcome]
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    /// Probability of an outcome event: the real part of `tr[rho M(B)]`,
    /// clamped to `[0, 1]`.
    pub fn born_probability(&self, rho: &DensityMatrix, event: &Event) -> Result<f64> {
        self.outcome_space
            .expect_same(event.space(), "born_probability")?;
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} with effects of dimension {}",
                rho.dim(),
                self.dim()
            )));
        }
        let p: f64 = event
            .indices()
            .map(|w| rho.matrix().matmul(&self.effects[w]).unwrap().trace().re)
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }

    /// Outcome probabilities for all atoms.
    pub fn outcome_probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        (0..self.outcome_space.size())
            .map(|w| {
                let atom = Event::singleton(self.outcome_space.clone(), w)?;
                self.born_probability(rho, &atom)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn born_rule_on_qubit_examples() {
        let povm = Povm::computational(2).unwrap();
        let plus = DensityMatrix::pure(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        // direct 2x2 trace computation: tr[|+><+| |k><k|] = |<k|+>|^2
        let p = povm.outcome_probabilities(&plus).unwrap();
        assert!((p[0] - 0.5).abs() <= 1e-12);
        assert!((p[1] - 0.5).abs() <= 1e-12);

        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = povm.outcome_probabilities(&zero).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);

        let full = Event::full(povm.outcome_space().clone());
        assert!((povm.born_probability(&plus, &full).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn born_rule_is_linear_in_the_state() {
        let povm = Povm::computational(2).unwrap();
        let rho1 = DensityMatrix::pure(&[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let rho2 = DensityMatrix::pure(&[c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]).unwrap();
        let alpha = 0.3;
        let mixed =
            DensityMatrix::mixture(&[rho1.clone(), rho2.clone()], &[alpha, 1.0 - alpha]).unwrap();
        let ev = Event::singleton(povm.outcome_space().clone(), 0).unwrap();
        let lhs = povm.born_probability(&mixed, &ev).unwrap();
        let rhs = alpha * povm.born_probability(&rho1, &ev).unwrap()
            + (1.0 - alpha) * povm.born_probability(&rho2, &ev).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn completeness_is_enforced() {
        let space = FiniteSpace::new(["a", "b"]).unwrap();
        let half = CMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(Povm::new(space, vec![half.clone(), half.clone().scale(c(0.5, 0.0))]).is_err());
    }
}
