//! Non-destructive experiments: extended observables over compound
//! outcomes `(w, t_out)`, the induced measure-to-measure instrument,
//! posterior conditioning, sequential composition, and the non-perturbing
//! product form.
//!
//! An [`ExtendedObservable`] stores the kernel `Y[w][t_out][t_in]`,
//! normalized over the compound outcome for every input point. Its two
//! marginals are ordinary observables: the outcome marginal drives the
//! statistics of `w`, the system marginal the unconditional posterior. The
//! instrument maps an input measure to the unnormalized posterior measure
//! of an outcome event; dividing by the event probability yields the
//! conditional posterior state.

use crate::measure::max_abs_diff;
use crate::observable::GeneralizedObservable;
use crate::space::{Event, FiniteSpace};
use crate::{tolerance, Error, FiniteMeasure, InformationState, Result};

/// Conditioning events with probability at or below this floor have no
/// canonical posterior.
pub const EVENT_PROBABILITY_FLOOR: f64 = 1e-15;

/// Kernel over compound outcomes: `Y[w][t_out][t_in]`, with
/// `sum_{w,t_out} Y[w][t_out][t_in] = 1` for every `t_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedObservable {
    outcome_space: FiniteSpace,
    out_info_space: FiniteSpace,
    in_info_space: FiniteSpace,
    kernel: Vec<Vec<Vec<f64>>>,
}

impl ExtendedObservable {
    pub fn new(
        outcome_space: FiniteSpace,
        out_info_space: FiniteSpace,
        in_info_space: FiniteSpace,
        mut kernel: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let (n_w, n_out, n_in) = (
            outcome_space.size(),
            out_info_space.size(),
            in_info_space.size(),
        );
        if kernel.len() != n_w
            || kernel.iter().any(|plane| plane.len() != n_out)
            || kernel
                .iter()
                .any(|plane| plane.iter().any(|row| row.len() != n_in))
        {
            return Err(Error::ShapeMismatch(format!(
                "kernel must be {n_w} x {n_out} x {n_in}"
            )));
        }
        let tol = tolerance();
        for (w, plane) in kernel.iter_mut().enumerate() {
            for (o, row) in plane.iter_mut().enumerate() {
                for (i, entry) in row.iter_mut().enumerate() {
                    if !entry.is_finite() || *entry < -tol || *entry > 1.0 + tol {
                        return Err(Error::EntryOutOfRange {
                            row: w * n_out + o,
                            column: i,
                            value: *entry,
                        });
                    }
                    *entry = entry.clamp(0.0, 1.0);
                }
            }
        }
        for t_in in 0..n_in {
            let sum: f64 = kernel
                .iter()
                .flat_map(|plane| plane.iter().map(move |row| row[t_in]))
                .sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::NotNormalized { column: t_in, sum });
            }
        }
        Ok(Self {
            outcome_space,
            out_info_space,
            in_info_space,
            kernel,
        })
    }

    pub(crate) fn from_parts(
        outcome_space: FiniteSpace,
        out_info_space: FiniteSpace,
        in_info_space: FiniteSpace,
        kernel: Vec<Vec<Vec<f64>>>,
    ) -> Self {
        #[cfg(debug_assertions)]
        for t_in in 0..in_info_space.size() {
            let sum: f64 = kernel
                .iter()
                .flat_map(|plane| plane.iter().map(move |row| row[t_in]))
                .sum();
            debug_assert!(
                (sum - 1.0).abs() <= 1e-9,
                "derived kernel column {t_in} sums to {sum}"
            );
        }
        Self {
            outcome_space,
            out_info_space,
            in_info_space,
            kernel,
        }
    }

    /// Classical errorless readout: outcome and posterior point both equal
    /// the input point.
    pub fn classical_readout(space: &FiniteSpace) -> Self {
        let n = space.size();
        let mut kernel = vec![vec![vec![0.0; n]; n]; n];
        for t in 0..n {
            kernel[t][t][t] = 1.0;
        }
        Self {
            outcome_space: space.clone(),
            out_info_space: space.clone(),
            in_info_space: space.clone(),
            kernel,
        }
    }

    /// Silent pass-through: a single outcome, posterior point equal to the
    /// input point. Neutral element of [`ExtendedObservable::compose`] up to
    /// outcome-space relabeling.
    pub fn identity(space: &FiniteSpace) -> Result<Self> {
        let n = space.size();
        let outcome = FiniteSpace::new(["pass"])?;
        let mut kernel = vec![vec![vec![0.0; n]; n]; 1];
        for t in 0..n {
            kernel[0][t][t] = 1.0;
        }
        Ok(Self {
            outcome_space: outcome,
            out_info_space: space.clone(),
            in_info_space: space.clone(),
            kernel,
        })
    }

    /// Product form: `Y[w][t_out][t_in] = M[w][t_in] S[t_out][t_in]`; the
    /// non-perturbing shape whose marginals are exactly `m` and `s`.
    pub fn product(m: &GeneralizedObservable, s: &GeneralizedObservable) -> Result<Self> {
        m.info_space()
            .expect_same(s.info_space(), "product extended observable")?;
        let n_in = m.info_space().size();
        let n_w = m.outcome_space().size();
        let n_out = s.outcome_space().size();
        let mut kernel = vec![vec![vec![0.0; n_in]; n_out]; n_w];
        for w in 0..n_w {
            for o in 0..n_out {
                for i in 0..n_in {
                    kernel[w][o][i] = m.entry(w, i) * s.entry(o, i);
                }
            }
        }
        Ok(Self::from_parts(
            m.outcome_space().clone(),
            s.outcome_space().clone(),
            m.info_space().clone(),
            kernel,
        ))
    }

    pub fn outcome_space(&self) -> &FiniteSpace {
        &self.outcome_space
    }

    pub fn out_info_space(&self) -> &FiniteSpace {
        &self.out_info_space
    }

    pub fn in_info_space(&self) -> &FiniteSpace {
        &self.in_info_space
    }

    pub fn kernel(&self) -> &[Vec<Vec<f64>>] {
        &self.kernel
    }

    pub fn entry(&self, outcome: usize, t_out: usize, t_in: usize) -> f64 {
        self.kernel[outcome][t_out][t_in]
    }

    /// Outcome marginal `M[w][t_in] = sum_{t_out} Y[w][t_out][t_in]`.
    pub fn outcome_marginal(&self) -> GeneralizedObservable {
        let n_in = self.in_info_space.size();
        let kernel = self
            .kernel
            .iter()
            .map(|plane| {
                let mut row = vec![0.0; n_in];
                for out_row in plane {
                    for (acc, &y) in row.iter_mut().zip(out_row) {
                        *acc += y;
                    }
                }
                row
            })
            .collect();
        GeneralizedObservable::from_parts(
            self.outcome_space.clone(),
            self.in_info_space.clone(),
            kernel,
        )
    }

    /// System marginal `S[t_out][t_in] = sum_w Y[w][t_out][t_in]`; its
    /// outcome distribution is the unconditional posterior.
    pub fn system_marginal(&self) -> GeneralizedObservable {
        let n_in = self.in_info_space.size();
        let n_out = self.out_info_space.size();
        let mut kernel = vec![vec![0.0; n_in]; n_out];
        for plane in &self.kernel {
            for (o, out_row) in plane.iter().enumerate() {
                for (acc, &y) in kernel[o].iter_mut().zip(out_row) {
                    *acc += y;
                }
            }
        }
        GeneralizedObservable::from_parts(
            self.out_info_space.clone(),
            self.in_info_space.clone(),
            kernel,
        )
    }

    /// The instrument value at an outcome event: a positive normalized map
    /// from input measures to posterior measures.
    pub fn instrument(&self, event: Event) -> Result<InstrumentMap<'_>> {
        self.outcome_space
            .expect_same(event.space(), "instrument")?;
        Ok(InstrumentMap {
            observable: self,
            event,
        })
    }

    /// Applies the instrument: the unnormalized posterior measure
    /// `out[t_out] = sum_{t_in} sum_{w in event} Y[w][t_out][t_in] m[t_in]`.
    pub fn instrument_apply(
        &self,
        event: &Event,
        measure: &FiniteMeasure,
    ) -> Result<FiniteMeasure> {
        self.outcome_space
            .expect_same(event.space(), "instrument_apply")?;
        self.in_info_space
            .expect_same(measure.space(), "instrument_apply")?;
        let mut out = vec![0.0; self.out_info_space.size()];
        for w in event.indices() {
            for (o, out_row) in self.kernel[w].iter().enumerate() {
                out[o] += out_row
                    .iter()
                    .zip(measure.weights())
                    .map(|(y, m)| y * m)
                    .sum::<f64>();
            }
        }
        FiniteMeasure::new(self.out_info_space.clone(), out)
    }

    /// Probability of an outcome event for a given input state.
    pub fn outcome_probability(&self, event: &Event, state: &InformationState) -> Result<f64> {
        Ok(self.instrument_apply(event, &state.to_measure())?.total())
    }

    /// Conditional posterior state given an outcome event: the normalized
    /// instrument output. Fails when the event probability is at or below
    /// [`EVENT_PROBABILITY_FLOOR`].
    pub fn posterior_state(
        &self,
        event: &Event,
        state_in: &InformationState,
    ) -> Result<InformationState> {
        let unnormalized = self.instrument_apply(event, &state_in.to_measure())?;
        if unnormalized.total() <= EVENT_PROBABILITY_FLOOR {
            return Err(Error::ZeroProbabilityEvent {
                probability: unnormalized.total(),
            });
        }
        unnormalized.normalize()
    }

    /// Sequential composition: run `self`, feed its posterior space into
    /// `second`. The result lives on the product outcome space and satisfies
    /// the chaining identity on rectangles.
    pub fn compose(&self, second: &ExtendedObservable) -> Result<ExtendedObservable> {
        self.out_info_space
            .expect_same(&second.in_info_space, "compose")?;
        let outcome_space = FiniteSpace::product(&self.outcome_space, &second.outcome_space)?;
        let n1 = self.outcome_space.size();
        let n2 = second.outcome_space.size();
        let n_mid = self.out_info_space.size();
        let n_out = second.out_info_space.size();
        let n_in = self.in_info_space.size();
        let mut kernel = vec![vec![vec![0.0; n_in]; n_out]; n1 * n2];
        for w1 in 0..n1 {
            for w2 in 0..n2 {
                let plane = &mut kernel[w1 * n2 + w2];
                for o in 0..n_out {
                    for i in 0..n_in {
                        let mut acc = 0.0;
                        for m in 0..n_mid {
                            acc += second.kernel[w2][o][m] * self.kernel[w1][m][i];
                        }
                        plane[o][i] = acc;
                    }
                }
            }
        }
        Ok(Self::from_parts(
            outcome_space,
            second.out_info_space.clone(),
            self.in_info_space.clone(),
            kernel,
        ))
    }

    /// True when the kernel factors into its own marginals within the
    /// tolerance, `Y = M x S`; such experiments leave point-mass inputs on
    /// an event-independent posterior.
    pub fn is_non_perturbing(&self) -> bool {
        let m = self.outcome_marginal();
        let s = self.system_marginal();
        let tol = tolerance();
        for (w, plane) in self.kernel.iter().enumerate() {
            for (o, row) in plane.iter().enumerate() {
                for (i, &y) in row.iter().enumerate() {
                    if (y - m.entry(w, i) * s.entry(o, i)).abs() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The same experiment viewed as a plain observable on the product
    /// space of compound outcomes, row-major over `(w, t_out)`.
    pub fn joint_observable(&self) -> Result<GeneralizedObservable> {
        let space = FiniteSpace::product(&self.outcome_space, &self.out_info_space)?;
        let mut kernel = Vec::with_capacity(space.size());
        for plane in &self.kernel {
            for row in plane {
                kernel.push(row.clone());
            }
        }
        Ok(GeneralizedObservable::from_parts(
            space,
            self.in_info_space.clone(),
            kernel,
        ))
    }

    pub fn max_kernel_diff(&self, other: &ExtendedObservable) -> f64 {
        self.kernel
            .iter()
            .zip(&other.kernel)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }
}

/// The value of the instrument at one outcome event: a positive map sending
/// input measures to posterior measures, normalized so that the full event
/// preserves total mass.
pub struct InstrumentMap<'a> {
    observable: &'a ExtendedObservable,
    event: Event,
}

impl InstrumentMap<'_> {
    pub fn event(&self) -> &Event {
        &self.event
    }

    pub fn apply(&self, measure: &FiniteMeasure) -> Result<FiniteMeasure> {
        self.observable.instrument_apply(&self.event, measure)
    }
}
