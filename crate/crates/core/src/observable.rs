//! Generalized observables: column-stochastic Markov kernels from
//! information points to outcomes.
//!
//! The kernel entry `K[w][t]` is the probability of observing outcome `w`
//! when the system is prepared at the information point `t`. Every affine
//! experiment (one whose outcome distribution respects convex mixing of
//! states) is represented by exactly one such kernel, and
//! [`GeneralizedObservable::from_experiment`] performs that construction by
//! probing the experiment on point masses. The rest of the module is the
//! kernel calculus: image, trivial, marginal, product, pullback and
//! pushforward observables.

use rand::Rng;

use crate::measure::max_abs_diff;
use crate::space::{Event, FiniteSpace};
use crate::testing::{random_state, seeded_rng};
use crate::{tolerance, Error, InformationState, Result};

/// Default tolerance for oracle normalization and affinity validation.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

const AFFINITY_PROBES: usize = 20;

/// A Markov kernel `K[w][t]` with outcome rows and information columns;
/// every column sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedObservable {
    outcome_space: FiniteSpace,
    info_space: FiniteSpace,
    kernel: Vec<Vec<f64>>,
}

impl GeneralizedObservable {
    /// Validates the kernel: shape `|outcomes| x |info points|`, entries in
    /// `[0, 1]` (clamped at the tolerance) and column sums 1 within the
    /// tolerance.
    pub fn new(
        outcome_space: FiniteSpace,
        info_space: FiniteSpace,
        kernel: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::build(outcome_space, info_space, kernel, false)
    }

    /// Like [`GeneralizedObservable::new`] but rescales columns whose sums
    /// fall outside the tolerance instead of rejecting them. Columns
    /// already within tolerance are stored untouched, so valid kernels
    /// round-trip bitwise.
    pub fn new_renormalized(
        outcome_space: FiniteSpace,
        info_space: FiniteSpace,
        kernel: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::build(outcome_space, info_space, kernel, true)
    }

    fn build(
        outcome_space: FiniteSpace,
        info_space: FiniteSpace,
        mut kernel: Vec<Vec<f64>>,
        renormalize: bool,
    ) -> Result<Self> {
        let (n_out, n_in) = (outcome_space.size(), info_space.size());
        if kernel.len() != n_out || kernel.iter().any(|row| row.len() != n_in) {
            return Err(Error::ShapeMismatch(format!(
                "kernel must be {n_out} rows of {n_in} entries"
            )));
        }
        let tol = tolerance();
        for (w, row) in kernel.iter_mut().enumerate() {
            for (t, entry) in row.iter_mut().enumerate() {
                if !entry.is_finite() || *entry < -tol || *entry > 1.0 + tol {
                    return Err(Error::EntryOutOfRange {
                        row: w,
                        column: t,
                        value: *entry,
                    });
                }
                *entry = entry.clamp(0.0, 1.0);
            }
        }
        for t in 0..n_in {
            let sum: f64 = kernel.iter().map(|row| row[t]).sum();
            if (sum - 1.0).abs() <= tol {
                continue;
            }
            if !renormalize || sum <= 0.0 {
                return Err(Error::NotNormalized { column: t, sum });
            }
            for row in kernel.iter_mut() {
                row[t] /= sum;
            }
        }
        Ok(Self {
            outcome_space,
            info_space,
            kernel,
        })
    }

    /// Constructor for kernels that are stochastic by construction
    /// (marginals, products, compositions of validated kernels).
    pub(crate) fn from_parts(
        outcome_space: FiniteSpace,
        info_space: FiniteSpace,
        kernel: Vec<Vec<f64>>,
    ) -> Self {
        #[cfg(debug_assertions)]
        for t in 0..info_space.size() {
            let sum: f64 = kernel.iter().map(|row| row[t]).sum();
            debug_assert!(
                (sum - 1.0).abs() <= 1e-9,
                "derived kernel column {t} sums to {sum}"
            );
        }
        Self {
            outcome_space,
            info_space,
            kernel,
        }
    }

    pub fn outcome_space(&self) -> &FiniteSpace {
        &self.outcome_space
    }

    pub fn info_space(&self) -> &FiniteSpace {
        &self.info_space
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn entry(&self, outcome: usize, point: usize) -> f64 {
        self.kernel[outcome][point]
    }

    /// Kernel column for one information point: the outcome distribution of
    /// the point mass at that point.
    pub fn column(&self, point: usize) -> Vec<f64> {
        self.kernel.iter().map(|row| row[point]).collect()
    }

    /// The observable's value on an event: a function on the information
    /// space, evaluated pointwise as `sum over w in event of K[w][t]`.
    pub fn value(&self, event: &Event) -> Result<Vec<f64>> {
        self.outcome_space.expect_same(event.space(), "value")?;
        let mut out = vec![0.0; self.info_space.size()];
        for w in event.indices() {
            for (acc, &k) in out.iter_mut().zip(&self.kernel[w]) {
                *acc += k;
            }
        }
        Ok(out)
    }

    /// Outcome distribution of a state: `p[w] = sum_t K[w][t] pi[t]`.
    pub fn outcome_distribution(&self, state: &InformationState) -> Result<InformationState> {
        self.info_space
            .expect_same(state.space(), "outcome_distribution")?;
        let pi = state.probabilities();
        let p = self
            .kernel
            .iter()
            .map(|row| row.iter().zip(pi).map(|(k, q)| k * q).sum())
            .collect();
        Ok(InformationState::new_internal(
            self.outcome_space.clone(),
            p,
        ))
    }

    /// Probability of an outcome event under a state.
    pub fn outcome_probability(&self, event: &Event, state: &InformationState) -> Result<f64> {
        self.outcome_distribution(state)?.measure_of(event)
    }

    /// The state induced on this observable's outcome space, read as an
    /// information space. Same arithmetic as [`Self::outcome_distribution`].
    pub fn induce_state(&self, state: &InformationState) -> Result<InformationState> {
        self.outcome_distribution(state)
    }

    /// Reconstructs the unique observable representing an affine experiment
    /// by probing it on point masses, then validates the probe: each column
    /// must be a probability vector, and the experiment must respect convex
    /// mixtures of states (checked on random mixtures at the oracle's
    /// affinity tolerance).
    pub fn from_experiment(oracle: &mut ExperimentOracle<'_>) -> Result<Self> {
        let outcome_space = oracle.outcome_space().clone();
        let info_space = oracle.info_space().clone();
        let (n_out, n_in) = (outcome_space.size(), info_space.size());

        let mut kernel = vec![vec![0.0; n_in]; n_out];
        for t in 0..n_in {
            let point = InformationState::dirac(info_space.clone(), t)?;
            let mut sum = 0.0;
            for w in 0..n_out {
                let atom = Event::singleton(outcome_space.clone(), w)?;
                let p = oracle.probability(&atom, &point);
                if !p.is_finite() || !(-ORACLE_TOLERANCE..=1.0 + ORACLE_TOLERANCE).contains(&p) {
                    return Err(Error::OracleNotNormalized(format!(
                        "value {p} on atom `{}` at point `{}`",
                        outcome_space.label(w),
                        info_space.label(t)
                    )));
                }
                kernel[w][t] = p.clamp(0.0, 1.0);
                sum += p;
            }
            if (sum - 1.0).abs() > ORACLE_TOLERANCE {
                return Err(Error::OracleNotNormalized(format!(
                    "atoms at point `{}` sum to {sum}",
                    info_space.label(t)
                )));
            }
        }

        oracle.validate_affinity()?;
        Self::new_renormalized(outcome_space, info_space, kernel)
    }

    /// Deterministic observable of a point map `f`: column `t` is the
    /// indicator of `f(t)`. `map[t]` is the outcome index of point `t`.
    pub fn image(
        info_space: FiniteSpace,
        outcome_space: FiniteSpace,
        map: &[usize],
    ) -> Result<Self> {
        if map.len() != info_space.size() {
            return Err(Error::ShapeMismatch(format!(
                "map covers {} of {} points",
                map.len(),
                info_space.size()
            )));
        }
        let mut kernel = vec![vec![0.0; info_space.size()]; outcome_space.size()];
        for (t, &w) in map.iter().enumerate() {
            if w >= outcome_space.size() {
                return Err(Error::InvalidMap {
                    from: t,
                    to: w,
                    size: outcome_space.size(),
                });
            }
            kernel[w][t] = 1.0;
        }
        Ok(Self {
            outcome_space,
            info_space,
            kernel,
        })
    }

    /// Recovers the point map when every column is a 0/1 indicator within
    /// the tolerance; `None` otherwise.
    pub fn as_image_map(&self) -> Option<Vec<usize>> {
        let tol = tolerance();
        let mut map = Vec::with_capacity(self.info_space.size());
        for t in 0..self.info_space.size() {
            let mut hit = None;
            for w in 0..self.outcome_space.size() {
                let k = self.kernel[w][t];
                if k >= 1.0 - tol {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(w);
                } else if k > tol {
                    return None;
                }
            }
            map.push(hit?);
        }
        Some(map)
    }

    /// Observable whose every column equals `nu`: the experiment's outcome
    /// distribution does not react to the state at all.
    pub fn trivial(info_space: FiniteSpace, nu: &InformationState) -> Self {
        let kernel = nu
            .probabilities()
            .iter()
            .map(|&p| vec![p; info_space.size()])
            .collect();
        Self {
            outcome_space: nu.space().clone(),
            info_space,
            kernel,
        }
    }

    /// True when all columns agree within the tolerance, i.e. the outcome
    /// distribution is the same for every state.
    pub fn is_trivial(&self) -> bool {
        let tol = tolerance();
        self.kernel
            .iter()
            .all(|row| row.iter().all(|&k| (k - row[0]).abs() <= tol))
    }

    /// Marginal over one factor of a declared product outcome space: the
    /// kernel summed over all other factors.
    pub fn marginal(&self, factor: usize) -> Result<Self> {
        let factors = self.outcome_space.factors().ok_or_else(|| {
            Error::NotProductSpace(format!("outcome space `{}`", self.outcome_space))
        })?;
        if factor >= factors.len() {
            return Err(Error::IndexOutOfRange {
                index: factor,
                size: factors.len(),
            });
        }
        let kept = factors[factor].clone();
        // row-major strides: index = sum_f i_f * stride_f
        let mut stride = 1;
        let mut strides = vec![0; factors.len()];
        for (f, space) in factors.iter().enumerate().rev() {
            strides[f] = stride;
            stride *= space.size();
        }
        let n_in = self.info_space.size();
        let mut kernel = vec![vec![0.0; n_in]; kept.size()];
        for (flat, row) in self.kernel.iter().enumerate() {
            let component = (flat / strides[factor]) % kept.size();
            for (acc, &k) in kernel[component].iter_mut().zip(row) {
                *acc += k;
            }
        }
        Ok(Self::from_parts(kept, self.info_space.clone(), kernel))
    }

    /// Product observable on the product outcome space:
    /// `K[(w1,w2)][t] = K1[w1][t] K2[w2][t]`. Both marginals recover the
    /// factors.
    ///
    /// The product is always defined here; systems whose observables obey a
    /// superselection rule may not admit it physically, and no such class
    /// structure is modeled.
    pub fn product(&self, other: &GeneralizedObservable) -> Result<Self> {
        self.info_space.expect_same(&other.info_space, "product")?;
        let outcome_space = FiniteSpace::product(&self.outcome_space, &other.outcome_space)?;
        let n_in = self.info_space.size();
        let mut kernel = Vec::with_capacity(self.kernel.len() * other.kernel.len());
        for row1 in &self.kernel {
            for row2 in &other.kernel {
                let mut row = Vec::with_capacity(n_in);
                for t in 0..n_in {
                    row.push(row1[t] * row2[t]);
                }
                kernel.push(row);
            }
        }
        Ok(Self::from_parts(
            outcome_space,
            self.info_space.clone(),
            kernel,
        ))
    }

    /// Pulls this observable back along a kernel `S` from a deeper
    /// information space onto ours: `K'[w][t'] = sum_t K[w][t] S[t][t']`.
    /// Outcome distributions then agree with first inducing the state
    /// through `S`.
    pub fn pull_back(&self, s_obs: &GeneralizedObservable) -> Result<Self> {
        self.info_space
            .expect_same(&s_obs.outcome_space, "pull_back")?;
        let n_prime = s_obs.info_space.size();
        let kernel = self
            .kernel
            .iter()
            .map(|row| {
                (0..n_prime)
                    .map(|tp| {
                        row.iter()
                            .enumerate()
                            .map(|(t, &k)| k * s_obs.kernel[t][tp])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_parts(
            self.outcome_space.clone(),
            s_obs.info_space.clone(),
            kernel,
        ))
    }

    /// Transports the observable onto an isomorphic information space:
    /// `K'[w][t'] = K[w][f(t')]` for a bijection `f` of point sets. Outcome
    /// distributions are invariant under the corresponding state transport.
    pub fn push_forward(&self, info_space: FiniteSpace, map: &[usize]) -> Result<Self> {
        let n = self.info_space.size();
        if info_space.size() != n || map.len() != n {
            return Err(Error::NotBijective(format!(
                "spaces of size {} and {}",
                n,
                info_space.size()
            )));
        }
        let mut seen = vec![false; n];
        for &t in map {
            if t >= n || seen[t] {
                return Err(Error::NotBijective(format!(
                    "map image repeats or skips index {t}"
                )));
            }
            seen[t] = true;
        }
        let kernel = self
            .kernel
            .iter()
            .map(|row| map.iter().map(|&t| row[t]).collect())
            .collect();
        Ok(Self {
            outcome_space: self.outcome_space.clone(),
            info_space,
            kernel,
        })
    }

    /// Largest entrywise kernel difference; spaces must agree.
    pub fn max_kernel_diff(&self, other: &GeneralizedObservable) -> Result<f64> {
        self.outcome_space
            .expect_same(&other.outcome_space, "max_kernel_diff")?;
        self.info_space
            .expect_same(&other.info_space, "max_kernel_diff")?;
        Ok(self
            .kernel
            .iter()
            .zip(&other.kernel)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max))
    }
}

type ProbeFn<'a> = Box<dyn FnMut(&Event, &InformationState) -> f64 + 'a>;

/// A black-box experiment: a callable producing the outcome probability
/// `mu(event; state)` over declared spaces.
///
/// The callable may be stateful (e.g. a sampling estimator with a cache);
/// the library invokes it from one thread at a time.
pub struct ExperimentOracle<'a> {
    outcome_space: FiniteSpace,
    info_space: FiniteSpace,
    probe: ProbeFn<'a>,
    affinity_tolerance: f64,
    affinity_seed: u64,
}

impl<'a> ExperimentOracle<'a> {
    pub fn new(
        outcome_space: FiniteSpace,
        info_space: FiniteSpace,
        probe: impl FnMut(&Event, &InformationState) -> f64 + 'a,
    ) -> Self {
        Self {
            outcome_space,
            info_space,
            probe: Box::new(probe),
            affinity_tolerance: ORACLE_TOLERANCE,
            affinity_seed: 0x0bcd_0bcd,
        }
    }

    /// Oracle that evaluates a known kernel exactly.
    pub fn from_observable(obs: &'a GeneralizedObservable) -> Self {
        Self::new(
            obs.outcome_space().clone(),
            obs.info_space().clone(),
            move |event, state| obs.outcome_probability(event, state).unwrap_or(f64::NAN),
        )
    }

    /// Loosens the affinity validation bound; stochastic oracles must set
    /// this to a multiple of their sampling noise.
    pub fn with_affinity_tolerance(mut self, tol: f64) -> Self {
        self.affinity_tolerance = tol;
        self
    }

    pub fn outcome_space(&self) -> &FiniteSpace {
        &self.outcome_space
    }

    pub fn info_space(&self) -> &FiniteSpace {
        &self.info_space
    }

    pub fn affinity_tolerance(&self) -> f64 {
        self.affinity_tolerance
    }

    pub fn probability(&mut self, event: &Event, state: &InformationState) -> f64 {
        (self.probe)(event, state)
    }

    /// On-demand check that the oracle returns a probability measure for a
    /// fixed state: atoms nonnegative, summing to the full-event value,
    /// full event equal to 1. Tolerance [`ORACLE_TOLERANCE`].
    pub fn validate_probability_measure(&mut self, state: &InformationState) -> Result<()> {
        let full = Event::full(self.outcome_space.clone());
        let total = self.probability(&full, state);
        if (total - 1.0).abs() > ORACLE_TOLERANCE {
            return Err(Error::OracleNotNormalized(format!(
                "full event gives {total}"
            )));
        }
        let mut sum = 0.0;
        for w in 0..self.outcome_space.size() {
            let atom = Event::singleton(self.outcome_space.clone(), w)?;
            let p = self.probability(&atom, state);
            if !p.is_finite() || p < -ORACLE_TOLERANCE {
                return Err(Error::OracleNotNormalized(format!(
                    "atom `{}` gives {p}",
                    self.outcome_space.label(w)
                )));
            }
            sum += p;
        }
        if (sum - total).abs() > ORACLE_TOLERANCE {
            return Err(Error::OracleNotNormalized(format!(
                "atoms sum to {sum}, full event gives {total}"
            )));
        }
        Ok(())
    }

    /// Validates mixing affinity on random probes: for random
    /// states and a random convex weight, the mixed-state probability of
    /// every atom must equal the mixture of probabilities within the
    /// affinity tolerance.
    fn validate_affinity(&mut self) -> Result<()> {
        let mut rng = seeded_rng(self.affinity_seed);
        let mut worst = 0.0f64;
        for _ in 0..AFFINITY_PROBES {
            let pi1 = random_state(&mut rng, &self.info_space);
            let pi2 = random_state(&mut rng, &self.info_space);
            let alpha: f64 = rng.random();
            let mixed = InformationState::mix(&[pi1.clone(), pi2.clone()], &[alpha, 1.0 - alpha])?;
            for w in 0..self.outcome_space.size() {
                let atom = Event::singleton(self.outcome_space.clone(), w)?;
                let lhs = self.probability(&atom, &mixed);
                let rhs = alpha * self.probability(&atom, &pi1)
                    + (1.0 - alpha) * self.probability(&atom, &pi2);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        if worst > self.affinity_tolerance {
            return Err(Error::OracleNotAffine {
                residual: worst,
                bound: self.affinity_tolerance,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing;

    fn two_two() -> GeneralizedObservable {
        let omega = FiniteSpace::new(["w1", "w2"]).unwrap();
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        GeneralizedObservable::new(omega, theta, vec![vec![0.7, 0.2], vec![0.3, 0.8]]).unwrap()
    }

    #[test]
    fn construction_validates_columns() {
        let omega = FiniteSpace::new(["w1", "w2"]).unwrap();
        let theta = FiniteSpace::new(["t1"]).unwrap();
        let err =
            GeneralizedObservable::new(omega.clone(), theta.clone(), vec![vec![0.5], vec![0.4]]);
        assert!(matches!(err, Err(Error::NotNormalized { column: 0, .. })));
        let err = GeneralizedObservable::new(omega, theta, vec![vec![1.5], vec![-0.5]]);
        assert!(matches!(err, Err(Error::EntryOutOfRange { .. })));
    }

    #[test]
    fn renormalized_constructor_rescales_columns() {
        let omega = FiniteSpace::new(["w1", "w2"]).unwrap();
        let theta = FiniteSpace::new(["t1"]).unwrap();
        let obs = GeneralizedObservable::new_renormalized(omega, theta, vec![vec![0.6], vec![0.2]])
            .unwrap();
        assert!((obs.entry(0, 0) - 0.75).abs() < 1e-15);
        assert!((obs.entry(1, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn value_on_events() {
        let obs = two_two();
        let full = Event::full(obs.outcome_space().clone());
        assert_eq!(obs.value(&full).unwrap(), vec![1.0, 1.0]);
        let empty = Event::empty(obs.outcome_space().clone());
        assert_eq!(obs.value(&empty).unwrap(), vec![0.0, 0.0]);
        let w1 = Event::singleton(obs.outcome_space().clone(), 0).unwrap();
        assert_eq!(obs.value(&w1).unwrap(), vec![0.7, 0.2]);
    }

    #[test]
    fn outcome_distribution_matches_summation() {
        let obs = two_two();
        // point masses read off kernel columns exactly
        for t in 0..2 {
            let d = InformationState::dirac(obs.info_space().clone(), t).unwrap();
            assert_eq!(
                obs.outcome_distribution(&d).unwrap().probabilities(),
                obs.column(t).as_slice()
            );
        }
        let pi = InformationState::new(obs.info_space().clone(), vec![0.5, 0.5]).unwrap();
        let p = obs.outcome_distribution(&pi).unwrap();
        // exhaustive summation oracle
        let expected: Vec<f64> = (0..2)
            .map(|w| (0..2).map(|t| obs.entry(w, t) * pi.probability(t)).sum())
            .collect();
        assert_eq!(p.probabilities(), expected.as_slice());
        assert!((p.probability(0) - 0.45).abs() < 1e-15);
        assert!((p.probability(1) - 0.55).abs() < 1e-15);
    }

    #[test]
    fn trivial_observable_ignores_the_state() {
        let theta = FiniteSpace::indexed("t", 3).unwrap();
        let omega = FiniteSpace::new(["a", "b"]).unwrap();
        let nu = InformationState::uniform(omega);
        let obs = GeneralizedObservable::trivial(theta.clone(), &nu);
        assert!(obs.is_trivial());
        let mut rng = testing::seeded_rng(7);
        for _ in 0..10 {
            let pi = testing::random_state(&mut rng, &theta);
            let p = obs.outcome_distribution(&pi).unwrap();
            assert!(p.approx_eq(&nu));
        }
    }

    #[test]
    fn is_trivial_tolerates_float_noise() {
        let omega = FiniteSpace::new(["a", "b"]).unwrap();
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        let obs = GeneralizedObservable::new(
            omega.clone(),
            theta.clone(),
            vec![vec![0.5, 0.5 + 1e-15], vec![0.5, 0.5 - 1e-15]],
        )
        .unwrap();
        assert!(obs.is_trivial());
        let identity = GeneralizedObservable::image(theta.clone(), omega, &[0, 1]).unwrap();
        assert!(!identity.is_trivial());
        // every observable on a one-point information space is trivial
        let single = FiniteSpace::new(["only"]).unwrap();
        let nu =
            InformationState::new(FiniteSpace::new(["a", "b"]).unwrap(), vec![0.3, 0.7]).unwrap();
        assert!(GeneralizedObservable::trivial(single, &nu).is_trivial());
    }

    #[test]
    fn image_observables_and_preimages() {
        let theta = FiniteSpace::new(["a", "b", "c"]).unwrap();
        let omega = FiniteSpace::new(["x", "y"]).unwrap();
        let obs = GeneralizedObservable::image(theta.clone(), omega.clone(), &[0, 0, 1]).unwrap();
        let pi = InformationState::new(theta.clone(), vec![0.2, 0.3, 0.5]).unwrap();
        let p = obs.outcome_distribution(&pi).unwrap();
        assert!((p.probability(0) - 0.5).abs() < 1e-15);
        assert!((p.probability(1) - 0.5).abs() < 1e-15);

        // identity map: distribution equals the state itself
        let idept = GeneralizedObservable::image(theta.clone(), theta.clone(), &[0, 1, 2]).unwrap();
        assert_eq!(
            idept.outcome_distribution(&pi).unwrap().probabilities(),
            pi.probabilities()
        );

        // constant map: point mass at the target
        let constant =
            GeneralizedObservable::image(theta.clone(), omega.clone(), &[1, 1, 1]).unwrap();
        let out = constant.outcome_distribution(&pi).unwrap();
        assert_eq!(out.probabilities(), &[0.0, 1.0]);

        assert!(matches!(
            GeneralizedObservable::image(theta, omega, &[0, 1, 2]),
            Err(Error::InvalidMap {
                from: 2,
                to: 2,
                size: 2
            })
        ));
    }

    #[test]
    fn image_map_round_trip() {
        let theta = FiniteSpace::indexed("t", 4).unwrap();
        let omega = FiniteSpace::indexed("w", 3).unwrap();
        let map = vec![2, 0, 1, 0];
        let obs = GeneralizedObservable::image(theta, omega, &map).unwrap();
        assert_eq!(obs.as_image_map().unwrap(), map);

        assert_eq!(two_two().as_image_map(), None);

        // a trivial observable with a point-mass nu is the constant map
        let theta = FiniteSpace::indexed("t", 3).unwrap();
        let omega = FiniteSpace::indexed("w", 2).unwrap();
        let nu = InformationState::dirac(omega, 1).unwrap();
        let obs = GeneralizedObservable::trivial(theta, &nu);
        assert_eq!(obs.as_image_map().unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn product_and_marginal() {
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        let o1 = GeneralizedObservable::new(
            FiniteSpace::new(["a", "b"]).unwrap(),
            theta.clone(),
            vec![vec![0.7, 0.5], vec![0.3, 0.5]],
        )
        .unwrap();
        let o2 = GeneralizedObservable::new(
            FiniteSpace::new(["x", "y"]).unwrap(),
            theta.clone(),
            vec![vec![0.6, 0.2], vec![0.4, 0.8]],
        )
        .unwrap();
        let joint = o1.product(&o2).unwrap();
        // entrywise product: column t1 is (0.42, 0.28, 0.18, 0.12)
        let col: Vec<f64> = (0..4).map(|w| joint.entry(w, 0)).collect();
        for (got, want) in col.iter().zip([0.42, 0.28, 0.18, 0.12]) {
            assert!((got - want).abs() <= 1e-15);
        }

        let m1 = joint.marginal(0).unwrap();
        let m2 = joint.marginal(1).unwrap();
        assert!(m1.max_kernel_diff(&o1).unwrap() <= 1e-15);
        assert!(m2.max_kernel_diff(&o2).unwrap() <= 1e-15);
    }

    #[test]
    fn marginal_partial_summation() {
        // joint column (0.1, 0.2, 0.3, 0.4) marginalizes to (0.3, 0.7)
        let theta = FiniteSpace::new(["t"]).unwrap();
        let a = FiniteSpace::new(["a1", "a2"]).unwrap();
        let b = FiniteSpace::new(["b1", "b2"]).unwrap();
        let prod = FiniteSpace::product(&a, &b).unwrap();
        let joint = GeneralizedObservable::new(
            prod,
            theta,
            vec![vec![0.1], vec![0.2], vec![0.3], vec![0.4]],
        )
        .unwrap();
        let m1 = joint.marginal(0).unwrap();
        assert!((m1.entry(0, 0) - 0.3).abs() < 1e-15);
        assert!((m1.entry(1, 0) - 0.7).abs() < 1e-15);
        // both marginals stay column-stochastic
        let m2 = joint.marginal(1).unwrap();
        for obs in [&m1, &m2] {
            let sum: f64 = (0..2).map(|w| obs.entry(w, 0)).sum();
            assert!((sum - 1.0).abs() <= 1e-12);
        }
        assert!(matches!(m1.marginal(0), Err(Error::NotProductSpace(_))));
    }

    #[test]
    fn product_with_trivial_factor() {
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        let obs = two_two();
        let nu =
            InformationState::new(FiniteSpace::new(["u", "v"]).unwrap(), vec![0.25, 0.75]).unwrap();
        let trivial = GeneralizedObservable::trivial(theta.clone(), &nu);
        let joint = obs.product(&trivial).unwrap();
        assert!(joint.marginal(0).unwrap().max_kernel_diff(&obs).unwrap() <= 1e-15);
        // second factor outputs nu independently of the state
        let mut rng = testing::seeded_rng(3);
        let pi = testing::random_state(&mut rng, &theta);
        let p2 = joint
            .marginal(1)
            .unwrap()
            .outcome_distribution(&pi)
            .unwrap();
        assert!(p2.approx_eq(&nu));
    }

    #[test]
    fn product_of_images_is_the_diagonal_image() {
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        let id1 = GeneralizedObservable::image(theta.clone(), theta.clone(), &[0, 1]).unwrap();
        let id2 = id1.clone();
        let joint = id1.product(&id2).unwrap();
        let map = joint.as_image_map().unwrap();
        // t -> (t, t): row-major pair indices 0 and 3
        assert_eq!(map, vec![0, 3]);
    }

    #[test]
    fn pull_back_composes_kernels() {
        let theta_prime = FiniteSpace::new(["s1", "s2"]).unwrap();
        let obs = two_two();
        let theta = obs.info_space().clone();

        // identity S leaves the observable unchanged, bitwise
        let id = GeneralizedObservable::image(theta.clone(), theta.clone(), &[0, 1]).unwrap();
        let pulled = obs.pull_back(&id).unwrap();
        assert_eq!(pulled.kernel(), obs.kernel());

        // image observables compose maps: psi o phi
        let psi_map = vec![1, 0];
        let phi_map = vec![0, 0];
        let omega = obs.outcome_space().clone();
        let psi = GeneralizedObservable::image(theta.clone(), omega, &psi_map).unwrap();
        let phi =
            GeneralizedObservable::image(theta_prime.clone(), theta.clone(), &phi_map).unwrap();
        let composed = psi.pull_back(&phi).unwrap();
        let expect: Vec<usize> = phi_map.iter().map(|&t| psi_map[t]).collect();
        assert_eq!(composed.as_image_map().unwrap(), expect);

        // trivial observables absorb any kernel
        let nu =
            InformationState::new(FiniteSpace::new(["a", "b"]).unwrap(), vec![0.3, 0.7]).unwrap();
        let trivial = GeneralizedObservable::trivial(theta.clone(), &nu);
        let s = GeneralizedObservable::new(
            theta.clone(),
            theta_prime,
            vec![vec![0.9, 0.4], vec![0.1, 0.6]],
        )
        .unwrap();
        let pulled_trivial = trivial.pull_back(&s).unwrap();
        assert!(pulled_trivial.is_trivial());
        assert!((pulled_trivial.entry(0, 0) - 0.3).abs() <= 1e-12);
    }

    #[test]
    fn pull_back_agrees_with_induced_states() {
        let mut rng = testing::seeded_rng(11);
        let theta_prime = FiniteSpace::indexed("s", 4).unwrap();
        let theta = FiniteSpace::indexed("t", 3).unwrap();
        let omega = FiniteSpace::indexed("w", 5).unwrap();
        let obs = testing::random_observable(&mut rng, &omega, &theta);
        let s = testing::random_observable(&mut rng, &theta, &theta_prime);
        for _ in 0..20 {
            let pi_prime = testing::random_state(&mut rng, &theta_prime);
            let via_pullback = obs
                .pull_back(&s)
                .unwrap()
                .outcome_distribution(&pi_prime)
                .unwrap();
            let via_induced = obs
                .outcome_distribution(&s.induce_state(&pi_prime).unwrap())
                .unwrap();
            assert!(
                max_abs_diff(via_pullback.probabilities(), via_induced.probabilities()) <= 1e-12
            );
        }
    }

    #[test]
    fn induced_states_through_image_kernels_are_preimage_sums() {
        let theta_prime = FiniteSpace::new(["s1", "s2", "s3"]).unwrap();
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        let phi =
            GeneralizedObservable::image(theta_prime.clone(), theta.clone(), &[0, 0, 1]).unwrap();
        let pi_prime = InformationState::new(theta_prime, vec![0.2, 0.3, 0.5]).unwrap();
        let induced = phi.induce_state(&pi_prime).unwrap();
        assert!((induced.probability(0) - 0.5).abs() < 1e-15);
        assert!((induced.probability(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn push_forward_relabels_points() {
        let obs = two_two();
        let theta = obs.info_space().clone();
        let same = obs.push_forward(theta.clone(), &[0, 1]).unwrap();
        assert_eq!(same.kernel(), obs.kernel());

        let swapped_space = FiniteSpace::new(["u1", "u2"]).unwrap();
        let swapped = obs.push_forward(swapped_space.clone(), &[1, 0]).unwrap();
        assert_eq!(swapped.column(0), obs.column(1));
        assert_eq!(swapped.column(1), obs.column(0));

        assert!(matches!(
            obs.push_forward(swapped_space, &[0, 0]),
            Err(Error::NotBijective(_))
        ));
    }

    #[test]
    fn push_forward_preserves_distributions() {
        let mut rng = testing::seeded_rng(23);
        let theta = FiniteSpace::indexed("t", 5).unwrap();
        let theta_prime = FiniteSpace::indexed("u", 5).unwrap();
        let omega = FiniteSpace::indexed("w", 3).unwrap();
        let obs = testing::random_observable(&mut rng, &omega, &theta);
        let map = vec![3, 0, 4, 1, 2];
        let moved = obs.push_forward(theta_prime.clone(), &map).unwrap();
        for _ in 0..10 {
            let pi_prime = testing::random_state(&mut rng, &theta_prime);
            // transport the state along the bijection: pi(F) = pi'(f^-1(F))
            let mut pi = vec![0.0; 5];
            for (tp, &t) in map.iter().enumerate() {
                pi[t] = pi_prime.probability(tp);
            }
            let pi = InformationState::new(theta.clone(), pi).unwrap();
            let a = moved.outcome_distribution(&pi_prime).unwrap();
            let b = obs.outcome_distribution(&pi).unwrap();
            assert!(max_abs_diff(a.probabilities(), b.probabilities()) <= 1e-12);
        }
    }

    #[test]
    fn from_experiment_round_trips_exact_kernels() {
        let obs = two_two();
        let mut oracle = ExperimentOracle::from_observable(&obs);
        let rebuilt = GeneralizedObservable::from_experiment(&mut oracle).unwrap();
        assert_eq!(rebuilt.kernel(), obs.kernel());
    }

    #[test]
    fn from_experiment_detects_constant_oracles() {
        let omega = FiniteSpace::new(["a", "b"]).unwrap();
        let theta = FiniteSpace::indexed("t", 3).unwrap();
        let nu = vec![0.25, 0.75];
        let nu_for_probe = nu.clone();
        let mut oracle = ExperimentOracle::new(omega, theta, move |event, _| {
            event.indices().map(|w| nu_for_probe[w]).sum()
        });
        let obs = GeneralizedObservable::from_experiment(&mut oracle).unwrap();
        assert!(obs.is_trivial());
        assert_eq!(obs.column(0), nu);
    }

    #[test]
    fn from_experiment_rejects_non_affine_oracles() {
        let omega = FiniteSpace::new(["a", "b"]).unwrap();
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        // squares the state weight: violates mixing
        let mut oracle = ExperimentOracle::new(omega, theta, |event, state| {
            let p = state.probability(0).powi(2);
            let q = 1.0 - p;
            event.indices().map(|w| if w == 0 { p } else { q }).sum()
        });
        assert!(matches!(
            GeneralizedObservable::from_experiment(&mut oracle),
            Err(Error::OracleNotAffine { .. })
        ));
    }

    #[test]
    fn from_experiment_rejects_unnormalized_oracles() {
        let omega = FiniteSpace::new(["a", "b"]).unwrap();
        let theta = FiniteSpace::new(["t1"]).unwrap();
        let mut oracle = ExperimentOracle::new(omega, theta, |event, _| 0.7 * event.count() as f64);
        assert!(matches!(
            GeneralizedObservable::from_experiment(&mut oracle),
            Err(Error::OracleNotNormalized(_))
        ));
    }

    #[test]
    fn oracle_probability_measure_validation() {
        let obs = two_two();
        let mut oracle = ExperimentOracle::from_observable(&obs);
        let pi = InformationState::uniform(obs.info_space().clone());
        oracle.validate_probability_measure(&pi).unwrap();
    }

    #[test]
    fn affinity_of_outcome_distributions() {
        let mut rng = testing::seeded_rng(5);
        for _ in 0..25 {
            let n_out = 1 + (rng.random::<u32>() % 6) as usize;
            let n_in = 1 + (rng.random::<u32>() % 6) as usize;
            let omega = FiniteSpace::indexed("w", n_out).unwrap();
            let theta = FiniteSpace::indexed("t", n_in).unwrap();
            let obs = testing::random_observable(&mut rng, &omega, &theta);
            let pi1 = testing::random_state(&mut rng, &theta);
            let pi2 = testing::random_state(&mut rng, &theta);
            let alpha: f64 = rng.random();
            let mixed =
                InformationState::mix(&[pi1.clone(), pi2.clone()], &[alpha, 1.0 - alpha]).unwrap();
            let lhs = obs.outcome_distribution(&mixed).unwrap();
            let p1 = obs.outcome_distribution(&pi1).unwrap();
            let p2 = obs.outcome_distribution(&pi2).unwrap();
            let rhs: Vec<f64> = p1
                .probabilities()
                .iter()
                .zip(p2.probabilities())
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect();
            assert!(max_abs_diff(lhs.probabilities(), &rhs) <= 1e-12);
        }
    }
}
