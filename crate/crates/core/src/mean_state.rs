//! Statistical description through vector embeddings.
//!
//! An [`EmbeddedSpace`] attaches to every point of a finite space a payload
//! vector in a common real vector space, together with a normalizing linear
//! functional `l` with `l[payload] = 1` and a norm bound. The mean state of
//! a probability vector is the payload barycenter; distinct states can
//! share a mean. An extended observable is *pre-linear* (relative to a set
//! of certified convex relations among payloads) when its statistical map
//! respects those relations, so outcome probabilities and posterior means
//! depend on the input only through its mean. The quantum module supplies
//! the canonical example: projector payloads with the trace functional.

use crate::instrument::{ExtendedObservable, EVENT_PROBABILITY_FLOOR};
use crate::measure::max_abs_diff;
use crate::space::{Event, FiniteSpace};
use crate::{tolerance, Error, InformationState, Result};

/// Tolerance for relation validation and pre-linearity checks; looser than
/// the library tolerance because relations are themselves certified data.
pub const PRELINEAR_TOLERANCE: f64 = 1e-9;

/// A finite space with payload vectors, a normalizing functional and a
/// norm bound (recorded, validated at construction, not used in
/// arithmetic).
#[derive(Debug, Clone)]
pub struct EmbeddedSpace {
    base: FiniteSpace,
    payloads: Vec<Vec<f64>>,
    functional: Vec<f64>,
    bound: f64,
}

impl EmbeddedSpace {
    pub fn new(
        base: FiniteSpace,
        payloads: Vec<Vec<f64>>,
        functional: Vec<f64>,
        bound: f64,
    ) -> Result<Self> {
        if payloads.len() != base.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} payloads for a space of size {}",
                payloads.len(),
                base.size()
            )));
        }
        let dim = functional.len();
        let tol = tolerance();
        for (k, payload) in payloads.iter().enumerate() {
            if payload.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "payload `{}` has dimension {}, functional has {dim}",
                    base.label(k),
                    payload.len()
                )));
            }
            let value: f64 = payload.iter().zip(&functional).map(|(p, l)| p * l).sum();
            if (value - 1.0).abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "functional value at `{}` is {value}, expected 1",
                    base.label(k)
                )));
            }
            let norm = payload.iter().map(|p| p * p).sum::<f64>().sqrt();
            if norm > bound + tol {
                return Err(Error::InvalidArgument(format!(
                    "payload `{}` has norm {norm}, above the bound {bound}",
                    base.label(k)
                )));
            }
        }
        Ok(Self {
            base,
            payloads,
            functional,
            bound,
        })
    }

    pub fn base(&self) -> &FiniteSpace {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.functional.len()
    }

    pub fn payload(&self, index: usize) -> &[f64] {
        &self.payloads[index]
    }

    pub fn payloads(&self) -> &[Vec<f64>] {
        &self.payloads
    }

    pub fn functional(&self) -> &[f64] {
        &self.functional
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn apply_functional(&self, vector: &[f64]) -> f64 {
        vector
            .iter()
            .zip(&self.functional)
            .map(|(v, l)| v * l)
            .sum()
    }

    /// Payload barycenter of a state; records the state as provenance.
    pub fn mean_state(&self, state: &InformationState) -> Result<MeanState> {
        self.base.expect_same(state.space(), "mean_state")?;
        let mut vector = vec![0.0; self.dim()];
        for (payload, &p) in self.payloads.iter().zip(state.probabilities()) {
            for (acc, &x) in vector.iter_mut().zip(payload) {
                *acc += p * x;
            }
        }
        Ok(MeanState {
            vector,
            provenance: Some(state.clone()),
        })
    }
}

/// A point of the payload space, optionally remembering which state it is
/// the barycenter of.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanState {
    vector: Vec<f64>,
    provenance: Option<InformationState>,
}

impl MeanState {
    pub fn new(vector: Vec<f64>) -> Self {
        Self {
            vector,
            provenance: None,
        }
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn provenance(&self) -> Option<&InformationState> {
        self.provenance.as_ref()
    }

    pub fn max_abs_diff(&self, other: &MeanState) -> f64 {
        max_abs_diff(&self.vector, &other.vector)
    }
}

/// An identity between two convex combinations of payloads:
/// `sum lhs c_i payload(i) = sum rhs c_j payload(j)`.
#[derive(Debug, Clone)]
pub struct ConvexRelation {
    lhs: Vec<(usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

impl ConvexRelation {
    /// One target point expressed as a convex combination of other points.
    pub fn point(target: usize, terms: Vec<(usize, f64)>) -> Self {
        Self {
            lhs: vec![(target, 1.0)],
            rhs: terms,
        }
    }

    /// Two convex combinations with equal barycenters.
    pub fn between(lhs: Vec<(usize, f64)>, rhs: Vec<(usize, f64)>) -> Self {
        Self { lhs, rhs }
    }

    pub fn lhs(&self) -> &[(usize, f64)] {
        &self.lhs
    }

    pub fn rhs(&self) -> &[(usize, f64)] {
        &self.rhs
    }

    fn validate(&self, embedding: &EmbeddedSpace) -> Result<()> {
        for side in [&self.lhs, &self.rhs] {
            let mut sum = 0.0;
            for &(index, weight) in side {
                embedding.base().check_index(index)?;
                if weight.is_nan() || weight < -PRELINEAR_TOLERANCE {
                    return Err(Error::BadRelation(format!("weight {weight} at {index}")));
                }
                sum += weight;
            }
            if (sum - 1.0).abs() > PRELINEAR_TOLERANCE {
                return Err(Error::BadRelation(format!(
                    "weights sum to {sum}, expected 1"
                )));
            }
        }
        let lhs = combine(&self.lhs, embedding.payloads(), embedding.dim());
        let rhs = combine(&self.rhs, embedding.payloads(), embedding.dim());
        let residual = max_abs_diff(&lhs, &rhs);
        if residual > PRELINEAR_TOLERANCE {
            return Err(Error::BadRelation(format!(
                "payload identity fails with residual {residual:.3e}"
            )));
        }
        Ok(())
    }
}

fn combine(terms: &[(usize, f64)], payloads: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for &(index, weight) in terms {
        for (acc, &x) in out.iter_mut().zip(&payloads[index]) {
            *acc += weight * x;
        }
    }
    out
}

/// The statistical map of an extended observable at an outcome event: one
/// payload-space vector per input point,
/// `v(t_in) = sum_{t_out} payload(t_out) * sum_{w in event} Y[w][t_out][t_in]`.
/// Applying the output functional recovers the event probability at the
/// corresponding point mass.
pub fn statistical_map(
    y: &ExtendedObservable,
    out_embedding: &EmbeddedSpace,
    event: &Event,
) -> Result<Vec<Vec<f64>>> {
    y.out_info_space()
        .expect_same(out_embedding.base(), "statistical_map")?;
    y.outcome_space()
        .expect_same(event.space(), "statistical_map")?;
    let dim = out_embedding.dim();
    let n_in = y.in_info_space().size();
    let n_out = y.out_info_space().size();
    let mut map = vec![vec![0.0; dim]; n_in];
    for t_in in 0..n_in {
        for t_out in 0..n_out {
            let weight: f64 = event.indices().map(|w| y.entry(w, t_out, t_in)).sum();
            if weight == 0.0 {
                continue;
            }
            let payload = out_embedding.payload(t_out);
            for (acc, &x) in map[t_in].iter_mut().zip(payload) {
                *acc += weight * x;
            }
        }
    }
    Ok(map)
}

/// Barycenter of the conditional posterior state.
pub fn posterior_mean(
    y: &ExtendedObservable,
    out_embedding: &EmbeddedSpace,
    event: &Event,
    state_in: &InformationState,
) -> Result<MeanState> {
    let posterior = y.posterior_state(event, state_in)?;
    out_embedding.mean_state(&posterior)
}

/// Certifies that the statistical map respects the supplied payload
/// relations: for every kernel atom `(w, t_out)` and every relation, the
/// two convex combinations of kernel values agree within
/// [`PRELINEAR_TOLERANCE`]. Relations failing their own payload identity
/// are rejected with [`Error::BadRelation`].
pub fn check_prelinear(
    y: &ExtendedObservable,
    in_embedding: &EmbeddedSpace,
    relations: &[ConvexRelation],
) -> Result<bool> {
    y.in_info_space()
        .expect_same(in_embedding.base(), "check_prelinear")?;
    for relation in relations {
        relation.validate(in_embedding)?;
    }
    for relation in relations {
        for plane in y.kernel() {
            for row in plane {
                let lhs: f64 = relation.lhs.iter().map(|&(i, c)| c * row[i]).sum();
                let rhs: f64 = relation.rhs.iter().map(|&(i, c)| c * row[i]).sum();
                if (lhs - rhs).abs() > PRELINEAR_TOLERANCE {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Evaluates the mean-state instrument: event probability and posterior
/// mean as functions of the input mean alone.
///
/// `eta_in` must carry provenance (a state whose barycenter it is); the
/// pre-linearity certificate guarantees the result does not depend on which
/// representing state was recorded.
pub fn mean_instrument_apply(
    y: &ExtendedObservable,
    in_embedding: &EmbeddedSpace,
    out_embedding: &EmbeddedSpace,
    event: &Event,
    eta_in: &MeanState,
    relations: &[ConvexRelation],
) -> Result<(f64, MeanState)> {
    if !check_prelinear(y, in_embedding, relations)? {
        return Err(Error::NotPrelinear(
            "statistical map violates a certified payload relation".into(),
        ));
    }
    let source = eta_in.provenance().ok_or_else(|| {
        Error::InvalidArgument("mean state carries no source decomposition".into())
    })?;
    in_embedding
        .base()
        .expect_same(source.space(), "mean_instrument_apply")?;
    let map = statistical_map(y, out_embedding, event)?;
    let mut combined = vec![0.0; out_embedding.dim()];
    for (vector, &c) in map.iter().zip(source.probabilities()) {
        for (acc, &x) in combined.iter_mut().zip(vector) {
            *acc += c * x;
        }
    }
    let probability = out_embedding.apply_functional(&combined);
    if probability <= EVENT_PROBABILITY_FLOOR {
        return Err(Error::ZeroProbabilityEvent { probability });
    }
    let mean = combined.iter().map(|x| x / probability).collect();
    Ok((probability, MeanState::new(mean)))
}
