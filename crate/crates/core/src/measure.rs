//! Finite measures and information states.
//!
//! A [`FiniteMeasure`] is a nonnegative weight vector over the points of a
//! space. Measures that differ only by a positive scale carry the same
//! information; an [`InformationState`] stores the canonical normalized
//! representative of that class. Class equality is vector equality within
//! the library tolerance.

use crate::space::{Event, FiniteSpace};
use crate::{tolerance, Error, Result};

/// Nonnegative weights over a finite space, with the cached total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    space: FiniteSpace,
    weights: Vec<f64>,
    total: f64,
}

impl FiniteMeasure {
    /// Validates weights: finite, and nonnegative up to the tolerance
    /// (tiny negatives are clamped to zero).
    pub fn new(space: FiniteSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for a space of size {}",
                weights.len(),
                space.size()
            )));
        }
        let tol = tolerance();
        let mut clamped = weights;
        for (index, w) in clamped.iter_mut().enumerate() {
            if !w.is_finite() || *w < -tol {
                return Err(Error::InvalidWeight { index, value: *w });
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total = clamped.iter().sum();
        Ok(Self {
            space,
            weights: clamped,
            total,
        })
    }

    pub fn zero(space: FiniteSpace) -> Self {
        let weights = vec![0.0; space.size()];
        Self {
            space,
            weights,
            total: 0.0,
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    /// Total mass, cached at construction.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Mass of an event.
    pub fn measure_of(&self, event: &Event) -> Result<f64> {
        self.space.expect_same(event.space(), "measure_of")?;
        Ok(event.indices().map(|i| self.weights[i]).sum())
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidArgument(format!("scale factor {factor}")));
        }
        FiniteMeasure::new(
            self.space.clone(),
            self.weights.iter().map(|w| w * factor).collect(),
        )
    }

    /// Canonical representative of the normalization class.
    ///
    /// Fails with [`Error::ZeroTotalMeasure`] when the total mass is zero.
    pub fn normalize(&self) -> Result<InformationState> {
        if self.total <= 0.0 {
            return Err(Error::ZeroTotalMeasure);
        }
        let probabilities = self.weights.iter().map(|w| w / self.total).collect();
        Ok(InformationState::new_internal(
            self.space.clone(),
            probabilities,
        ))
    }
}

/// A normalized weight vector: the canonical representative of a class of
/// finite measures equal up to positive scale.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationState {
    space: FiniteSpace,
    probabilities: Vec<f64>,
}

impl InformationState {
    /// Validates the vector: entries nonnegative (tiny negatives clamped)
    /// and summing to 1 within the tolerance.
    pub fn new(space: FiniteSpace, probabilities: Vec<f64>) -> Result<Self> {
        let measure = FiniteMeasure::new(space, probabilities)?;
        let sum = measure.total();
        if (sum - 1.0).abs() > tolerance() {
            return Err(Error::BadConvexWeights(format!(
                "probabilities sum to {sum:.17}, expected 1"
            )));
        }
        Ok(Self {
            space: measure.space,
            probabilities: measure.weights,
        })
    }

    /// Constructor for vectors that are normalized by construction.
    pub(crate) fn new_internal(space: FiniteSpace, probabilities: Vec<f64>) -> Self {
        debug_assert!(
            (probabilities.iter().sum::<f64>() - 1.0).abs() <= 64.0 * tolerance(),
            "internal state not normalized"
        );
        Self {
            space,
            probabilities,
        }
    }

    /// Point mass at `point`.
    pub fn dirac(space: FiniteSpace, point: usize) -> Result<Self> {
        space.check_index(point)?;
        let mut probabilities = vec![0.0; space.size()];
        probabilities[point] = 1.0;
        Ok(Self {
            space,
            probabilities,
        })
    }

    pub fn uniform(space: FiniteSpace) -> Self {
        let p = 1.0 / space.size() as f64;
        let probabilities = vec![p; space.size()];
        Self {
            space,
            probabilities,
        }
    }

    /// Pointwise convex combination of states on a common space.
    pub fn mix(states: &[InformationState], coefficients: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != coefficients.len() {
            return Err(Error::BadConvexWeights(format!(
                "{} states with {} coefficients",
                states.len(),
                coefficients.len()
            )));
        }
        let tol = tolerance();
        let mut sum = 0.0;
        for &c in coefficients {
            if !c.is_finite() || c < -tol {
                return Err(Error::BadConvexWeights(format!("coefficient {c}")));
            }
            sum += c;
        }
        if (sum - 1.0).abs() > tol {
            return Err(Error::BadConvexWeights(format!(
                "coefficients sum to {sum:.17}, expected 1"
            )));
        }
        let space = states[0].space.clone();
        for s in &states[1..] {
            space.expect_same(&s.space, "mix")?;
        }
        let mut probabilities = vec![0.0; space.size()];
        for (state, &c) in states.iter().zip(coefficients) {
            let c = c.max(0.0);
            for (acc, &p) in probabilities.iter_mut().zip(&state.probabilities) {
                *acc += c * p;
            }
        }
        Ok(Self::new_internal(space, probabilities))
    }

    /// Probability of an event.
    pub fn measure_of(&self, event: &Event) -> Result<f64> {
        self.space.expect_same(event.space(), "measure_of")?;
        Ok(event.indices().map(|i| self.probabilities[i]).sum())
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    /// The state viewed as a measure of total mass 1.
    pub fn to_measure(&self) -> FiniteMeasure {
        FiniteMeasure {
            space: self.space.clone(),
            weights: self.probabilities.clone(),
            total: self.probabilities.iter().sum(),
        }
    }

    /// Class equality: same space and vectors equal within the tolerance.
    pub fn approx_eq(&self, other: &InformationState) -> bool {
        self.space == other.space
            && self
                .probabilities
                .iter()
                .zip(&other.probabilities)
                .all(|(a, b)| (a - b).abs() <= tolerance())
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
