//! Seeded Monte Carlo sampling: the independent stochastic oracle for the
//! analytic formulas elsewhere in the crate.
//!
//! Sampling is reproducible by construction. The RNG is ChaCha8; a run of
//! `n` trials is split into a fixed schedule of chunks depending only on
//! `n`, and chunk `p` draws from the stream obtained by seeding ChaCha8
//! with the step seed and selecting stream `p`. Workers claim chunks
//! round-robin and the results merge in chunk order, so counts and trial
//! records are identical for every worker count and across platforms.
//! Categorical draws invert the CDF in the stored point order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instrument::ExtendedObservable;
use crate::observable::{ExperimentOracle, GeneralizedObservable};
use crate::space::FiniteSpace;
use crate::{Error, InformationState, Result};

/// Acceptance band for analytic-vs-empirical comparisons, in standard
/// deviations (false alarm around 6e-5 per comparison).
pub const DEFAULT_SIGMA_BOUND: f64 = 4.0;

const PARTITION_SIZE: usize = 65536;

/// One sampled trial of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: usize,
    pub theta_in: usize,
    pub omega: usize,
    pub theta_out: Option<usize>,
}

/// Empirical outcome distribution of a plain experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSample {
    space: FiniteSpace,
    counts: Vec<u64>,
    trials: usize,
    records: Vec<TrialRecord>,
}

impl ExperimentSample {
    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.trials as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Per-outcome z-scores of the empirical frequencies against analytic
    /// probabilities.
    pub fn z_scores(&self, analytic: &[f64]) -> Vec<f64> {
        self.counts
            .iter()
            .zip(analytic)
            .map(|(&count, &p)| z_score(p, count, self.trials))
            .collect()
    }

    pub fn max_abs_z(&self, analytic: &[f64]) -> f64 {
        self.z_scores(analytic)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// Empirical joint distribution of compound outcomes `(w, t_out)`.
#[derive(Debug, Clone)]
pub struct InstrumentSample {
    outcome_space: FiniteSpace,
    out_info_space: FiniteSpace,
    joint_counts: Vec<Vec<u64>>,
    trials: usize,
    records: Vec<TrialRecord>,
}

impl InstrumentSample {
    pub fn outcome_space(&self) -> &FiniteSpace {
        &self.outcome_space
    }

    pub fn out_info_space(&self) -> &FiniteSpace {
        &self.out_info_space
    }

    pub fn joint_counts(&self) -> &[Vec<u64>] {
        &self.joint_counts
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn joint_frequencies(&self) -> Vec<Vec<f64>> {
        let n = self.trials as f64;
        self.joint_counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / n).collect())
            .collect()
    }

    pub fn outcome_counts(&self) -> Vec<u64> {
        self.joint_counts
            .iter()
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Empirical posterior given an outcome; `None` when the outcome never
    /// occurred.
    pub fn conditional_posterior(&self, outcome: usize) -> Option<Vec<f64>> {
        let total: u64 = self.joint_counts[outcome].iter().sum();
        if total == 0 {
            return None;
        }
        Some(
            self.joint_counts[outcome]
                .iter()
                .map(|&c| c as f64 / total as f64)
                .collect(),
        )
    }
}

/// Inverse-CDF categorical draw over the stored point order. When `u`
/// lands beyond the accumulated total (the sums round to slightly below
/// 1), the draw falls back to the last cell of positive probability, so
/// zero-probability cells are never selected.
pub fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            if u < acc {
                return i;
            }
            last_positive = i;
        }
    }
    last_positive
}

pub fn binomial_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Standardized deviation of an empirical count from its analytic
/// probability. Degenerate probabilities (sigma zero) give 0 on exact
/// agreement and infinity otherwise.
pub fn z_score(p: f64, count: u64, trials: usize) -> f64 {
    let freq = count as f64 / trials as f64;
    let sigma = binomial_sigma(p, trials);
    if sigma == 0.0 {
        if freq == p {
            0.0
        } else {
            f64::INFINITY.copysign(freq - p)
        }
    } else {
        (freq - p) / sigma
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn partitions(trials: usize) -> Vec<(usize, usize)> {
    let mut parts = Vec::new();
    let mut start = 0;
    while start < trials {
        let len = PARTITION_SIZE.min(trials - start);
        parts.push((start, len));
        start += len;
    }
    parts
}

fn partition_rng(seed: u64, partition: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition as u64);
    rng
}

/// Runs one closure per partition, round-robin over `workers` threads, and
/// returns the results in partition order.
fn run_partitions<R, F>(trials: usize, workers: usize, work: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize, usize, usize) -> R + Sync,
{
    let parts = partitions(trials);
    let workers = workers.max(1);
    if workers == 1 {
        return parts
            .iter()
            .enumerate()
            .map(|(i, &(start, len))| work(i, start, len))
            .collect();
    }
    let mut indexed: Vec<(usize, R)> = std::thread::scope(|scope| {
        let work = &work;
        let parts = &parts;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    parts
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .map(|(i, &(start, len))| (i, work(i, start, len)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sampling worker panicked"))
            .collect()
    });
    indexed.sort_by_key(|&(i, _)| i);
    indexed.into_iter().map(|(_, r)| r).collect()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "trial count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Two-stage sampling of an experiment: draw a point from the state, then
/// an outcome from that point's kernel column. Deterministic per seed,
/// independent of the worker count.
pub fn sample_experiment(
    obs: &GeneralizedObservable,
    state: &InformationState,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<ExperimentSample> {
    check_trials(trials)?;
    obs.info_space()
        .expect_same(state.space(), "sample_experiment")?;
    let n_out = obs.outcome_space().size();
    let n_in = obs.info_space().size();
    let columns: Vec<Vec<f64>> = (0..n_in).map(|t| obs.column(t)).collect();
    let pi = state.probabilities();

    let chunks = run_partitions(trials, workers, |part, start, len| {
        let mut rng = partition_rng(seed, part);
        let mut counts = vec![0u64; n_out];
        let mut records = Vec::with_capacity(len);
        for i in 0..len {
            let theta = sample_index(pi, rng.random::<f64>());
            let omega = sample_index(&columns[theta], rng.random::<f64>());
            counts[omega] += 1;
            records.push(TrialRecord {
                trial: start + i,
                theta_in: theta,
                omega,
                theta_out: None,
            });
        }
        (counts, records)
    });

    let mut counts = vec![0u64; n_out];
    let mut records = Vec::with_capacity(trials);
    for (chunk_counts, chunk_records) in chunks {
        for (acc, c) in counts.iter_mut().zip(chunk_counts) {
            *acc += c;
        }
        records.extend(chunk_records);
    }
    Ok(ExperimentSample {
        space: obs.outcome_space().clone(),
        counts,
        trials,
        records,
    })
}

/// Two-stage sampling of a non-destructive experiment: draw a point from
/// the state, then a compound outcome `(w, t_out)` from that point's joint
/// column.
pub fn sample_instrument(
    y: &ExtendedObservable,
    state: &InformationState,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<InstrumentSample> {
    check_trials(trials)?;
    y.in_info_space()
        .expect_same(state.space(), "sample_instrument")?;
    let n_w = y.outcome_space().size();
    let n_out = y.out_info_space().size();
    let n_in = y.in_info_space().size();
    // flattened compound distribution per input point, row-major (w, t_out)
    let joints: Vec<Vec<f64>> = (0..n_in)
        .map(|t_in| {
            let mut flat = Vec::with_capacity(n_w * n_out);
            for w in 0..n_w {
                for o in 0..n_out {
                    flat.push(y.entry(w, o, t_in));
                }
            }
            flat
        })
        .collect();
    let pi = state.probabilities();

    let chunks = run_partitions(trials, workers, |part, start, len| {
        let mut rng = partition_rng(seed, part);
        let mut counts = vec![vec![0u64; n_out]; n_w];
        let mut records = Vec::with_capacity(len);
        for i in 0..len {
            let theta = sample_index(pi, rng.random::<f64>());
            let flat = sample_index(&joints[theta], rng.random::<f64>());
            let (omega, theta_out) = (flat / n_out, flat % n_out);
            counts[omega][theta_out] += 1;
            records.push(TrialRecord {
                trial: start + i,
                theta_in: theta,
                omega,
                theta_out: Some(theta_out),
            });
        }
        (counts, records)
    });

    let mut joint_counts = vec![vec![0u64; n_out]; n_w];
    let mut records = Vec::with_capacity(trials);
    for (chunk_counts, chunk_records) in chunks {
        for (acc_row, row) in joint_counts.iter_mut().zip(chunk_counts) {
            for (acc, c) in acc_row.iter_mut().zip(row) {
                *acc += c;
            }
        }
        records.extend(chunk_records);
    }
    Ok(InstrumentSample {
        outcome_space: y.outcome_space().clone(),
        out_info_space: y.out_info_space().clone(),
        joint_counts,
        trials,
        records,
    })
}

/// Sequential two-stage sampling of two chained experiments: each trial
/// draws `(w1, t1)` from the first kernel and `(w2, t_out)` from the second
/// at `t1`. The empirical joint lands on the same compound space as
/// [`ExtendedObservable::compose`], with the composed outcome stored
/// row-major as `w1 * |W2| + w2`.
pub fn sample_consecutive(
    first: &ExtendedObservable,
    second: &ExtendedObservable,
    state: &InformationState,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<InstrumentSample> {
    check_trials(trials)?;
    first
        .out_info_space()
        .expect_same(second.in_info_space(), "sample_consecutive")?;
    first
        .in_info_space()
        .expect_same(state.space(), "sample_consecutive")?;
    let outcome_space = FiniteSpace::product(first.outcome_space(), second.outcome_space())?;
    let n_w1 = first.outcome_space().size();
    let n_w2 = second.outcome_space().size();
    let n_mid = first.out_info_space().size();
    let n_out = second.out_info_space().size();
    let n_in = first.in_info_space().size();

    let flatten = |y: &ExtendedObservable, n_w: usize, n_o: usize, n_i: usize| -> Vec<Vec<f64>> {
        (0..n_i)
            .map(|t| {
                let mut flat = Vec::with_capacity(n_w * n_o);
                for w in 0..n_w {
                    for o in 0..n_o {
                        flat.push(y.entry(w, o, t));
                    }
                }
                flat
            })
            .collect()
    };
    let joints1 = flatten(first, n_w1, n_mid, n_in);
    let joints2 = flatten(second, n_w2, n_out, n_mid);
    let pi = state.probabilities();

    let chunks = run_partitions(trials, workers, |part, start, len| {
        let mut rng = partition_rng(seed, part);
        let mut counts = vec![vec![0u64; n_out]; n_w1 * n_w2];
        let mut records = Vec::with_capacity(len);
        for i in 0..len {
            let theta = sample_index(pi, rng.random::<f64>());
            let flat1 = sample_index(&joints1[theta], rng.random::<f64>());
            let (w1, t1) = (flat1 / n_mid, flat1 % n_mid);
            let flat2 = sample_index(&joints2[t1], rng.random::<f64>());
            let (w2, theta_out) = (flat2 / n_out, flat2 % n_out);
            let omega = w1 * n_w2 + w2;
            counts[omega][theta_out] += 1;
            records.push(TrialRecord {
                trial: start + i,
                theta_in: theta,
                omega,
                theta_out: Some(theta_out),
            });
        }
        (counts, records)
    });

    let mut joint_counts = vec![vec![0u64; n_out]; n_w1 * n_w2];
    let mut records = Vec::with_capacity(trials);
    for (chunk_counts, chunk_records) in chunks {
        for (acc_row, row) in joint_counts.iter_mut().zip(chunk_counts) {
            for (acc, c) in acc_row.iter_mut().zip(row) {
                *acc += c;
            }
        }
        records.extend(chunk_records);
    }
    Ok(InstrumentSample {
        outcome_space,
        out_info_space: second.out_info_space().clone(),
        joint_counts,
        trials,
        records,
    })
}

/// Wraps a known kernel in a sampling estimator: every distinct queried
/// state is sampled once at `trials_per_state` trials (deterministic
/// stream order) and cached. The oracle's affinity tolerance is widened to
/// eight standard deviations of the mixture residual, so exact-identity
/// validation does not reject honest sampling noise.
pub fn monte_carlo_oracle(
    obs: &GeneralizedObservable,
    trials_per_state: usize,
    seed: u64,
) -> ExperimentOracle<'static> {
    let owned = obs.clone();
    let outcome_space = obs.outcome_space().clone();
    let info_space = obs.info_space().clone();
    let mut cache: std::collections::HashMap<Vec<u64>, Vec<f64>> = std::collections::HashMap::new();
    let mut issued: u64 = 0;
    let probe = move |event: &crate::space::Event, state: &InformationState| -> f64 {
        let key: Vec<u64> = state.probabilities().iter().map(|p| p.to_bits()).collect();
        let frequencies = cache.entry(key).or_insert_with(|| {
            let stream_seed = seed.wrapping_add(issued.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            issued += 1;
            sample_experiment(&owned, state, trials_per_state, stream_seed, 1)
                .map(|s| s.frequencies())
                .unwrap_or_default()
        });
        if frequencies.is_empty() {
            return f64::NAN;
        }
        event.indices().map(|w| frequencies[w]).sum()
    };
    let noise = 8.0 * (0.375 / trials_per_state as f64).sqrt();
    ExperimentOracle::new(outcome_space, info_space, probe)
        .with_affinity_tolerance(noise.max(crate::observable::ORACLE_TOLERANCE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Event;
    use crate::testing;

    fn two_two() -> GeneralizedObservable {
        let omega = FiniteSpace::new(["w1", "w2"]).unwrap();
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        GeneralizedObservable::new(omega, theta, vec![vec![0.7, 0.2], vec![0.3, 0.8]]).unwrap()
    }

    #[test]
    fn sample_index_walks_the_cdf() {
        let probs = [0.25, 0.5, 0.25];
        assert_eq!(sample_index(&probs, 0.0), 0);
        assert_eq!(sample_index(&probs, 0.2499), 0);
        assert_eq!(sample_index(&probs, 0.25), 1);
        assert_eq!(sample_index(&probs, 0.74), 1);
        assert_eq!(sample_index(&probs, 0.76), 2);
        assert_eq!(sample_index(&probs, 0.999999), 2);
    }

    #[test]
    fn sample_index_never_picks_zero_probability_cells() {
        // trailing zero cell: even u at the very top of [0, 1) must not
        // select it
        let probs = [0.7, 0.3, 0.0];
        assert_eq!(sample_index(&probs, 1.0 - 1e-16), 1);
        let probs = [0.0, 1.0, 0.0];
        for u in [0.0, 0.5, 1.0 - 1e-16] {
            assert_eq!(sample_index(&probs, u), 1);
        }
    }

    #[test]
    fn counts_are_identical_across_worker_counts() {
        let obs = two_two();
        let pi = InformationState::new(obs.info_space().clone(), vec![0.5, 0.5]).unwrap();
        let n = 200_000;
        let single = sample_experiment(&obs, &pi, n, 42, 1).unwrap();
        let four = sample_experiment(&obs, &pi, n, 42, 4).unwrap();
        assert_eq!(single.counts(), four.counts());
        assert_eq!(single.records(), four.records());
        let rerun = sample_experiment(&obs, &pi, n, 42, 2).unwrap();
        assert_eq!(single.counts(), rerun.counts());
        // different seed, different stream
        let other = sample_experiment(&obs, &pi, n, 43, 1).unwrap();
        assert_ne!(single.counts(), other.counts());
    }

    #[test]
    fn empirical_frequency_matches_the_analytic_value() {
        let obs = two_two();
        let pi = InformationState::new(obs.info_space().clone(), vec![0.5, 0.5]).unwrap();
        let n = 100_000;
        let sample = sample_experiment(&obs, &pi, n, 7, 2).unwrap();
        let analytic = obs.outcome_distribution(&pi).unwrap();
        // 0.45 within five sigmas at this n
        let z = sample.max_abs_z(analytic.probabilities());
        assert!(z <= 5.0, "z = {z}");
    }

    #[test]
    fn trivial_observable_samples_its_nu() {
        let theta = FiniteSpace::indexed("t", 4).unwrap();
        let omega = FiniteSpace::indexed("w", 3).unwrap();
        let nu = InformationState::new(omega, vec![0.2, 0.5, 0.3]).unwrap();
        let obs = GeneralizedObservable::trivial(theta.clone(), &nu);
        let mut rng = testing::seeded_rng(3);
        let pi = testing::random_state(&mut rng, &theta);
        let sample = sample_experiment(&obs, &pi, 100_000, 11, 1).unwrap();
        assert!(sample.max_abs_z(nu.probabilities()) <= 5.0);
    }

    #[test]
    fn identity_image_samples_the_state_itself() {
        let theta = FiniteSpace::indexed("t", 3).unwrap();
        let obs = GeneralizedObservable::image(theta.clone(), theta.clone(), &[0, 1, 2]).unwrap();
        let pi = InformationState::new(theta, vec![0.5, 0.2, 0.3]).unwrap();
        let sample = sample_experiment(&obs, &pi, 100_000, 11, 1).unwrap();
        assert!(sample.max_abs_z(pi.probabilities()) <= 5.0);
    }

    #[test]
    fn instrument_sampling_estimates_posteriors() {
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        let y = ExtendedObservable::classical_readout(&theta);
        let pi = InformationState::new(theta, vec![0.3, 0.7]).unwrap();
        let sample = sample_instrument(&y, &pi, 50_000, 5, 2).unwrap();
        // deterministic readout: posterior given w is exactly the point mass
        let post0 = sample.conditional_posterior(0).unwrap();
        assert_eq!(post0, vec![1.0, 0.0]);
        let post1 = sample.conditional_posterior(1).unwrap();
        assert_eq!(post1, vec![0.0, 1.0]);
    }

    #[test]
    fn product_instrument_posteriors_do_not_depend_on_the_outcome() {
        let mut rng = testing::seeded_rng(21);
        let omega = FiniteSpace::indexed("w", 2).unwrap();
        let theta = FiniteSpace::indexed("t", 3).unwrap();
        let out = FiniteSpace::indexed("u", 3).unwrap();
        let m = testing::random_observable(&mut rng, &omega, &theta);
        let s = testing::random_observable(&mut rng, &out, &theta);
        let y = ExtendedObservable::product(&m, &s).unwrap();
        // point-mass prior: conditional posteriors agree across outcomes
        let point = InformationState::dirac(theta.clone(), 1).unwrap();
        let sample = sample_instrument(&y, &point, 200_000, 9, 2).unwrap();
        let expected: Vec<f64> = s.column(1);
        for w in 0..2 {
            if let Some(post) = sample.conditional_posterior(w) {
                let n_w: u64 = sample.joint_counts()[w].iter().sum();
                for (o, (&e, &f)) in expected.iter().zip(&post).enumerate() {
                    let z = z_score(e, (f * n_w as f64).round() as u64, n_w as usize);
                    assert!(z.abs() <= 5.0, "outcome {w}, point {o}: z = {z}");
                }
            }
        }
    }

    #[test]
    fn worked_instrument_posterior_frequency() {
        let omega = FiniteSpace::new(["w1", "w2"]).unwrap();
        let theta = FiniteSpace::new(["t1", "t2"]).unwrap();
        let m =
            GeneralizedObservable::new(omega, theta.clone(), vec![vec![0.7, 0.2], vec![0.3, 0.8]])
                .unwrap();
        let s = GeneralizedObservable::image(theta.clone(), theta.clone(), &[0, 1]).unwrap();
        let y = ExtendedObservable::product(&m, &s).unwrap();
        let pi = InformationState::new(theta, vec![0.5, 0.5]).unwrap();
        let sample = sample_instrument(&y, &pi, 200_000, 31, 4).unwrap();
        let post = sample.conditional_posterior(0).unwrap();
        let n0: u64 = sample.joint_counts()[0].iter().sum();
        let z = z_score(7.0 / 9.0, (post[0] * n0 as f64).round() as u64, n0 as usize);
        assert!(z.abs() <= 5.0, "z = {z}");
    }

    #[test]
    fn consecutive_sampling_matches_the_composed_kernel() {
        let mut rng = testing::seeded_rng(63);
        let y1 = testing::random_extended_sized(&mut rng, 2, 2, 2);
        let y2 = testing::random_extended_with(
            &mut rng,
            &FiniteSpace::indexed("v", 2).unwrap(),
            &FiniteSpace::indexed("z", 2).unwrap(),
            y1.out_info_space(),
        );
        let composed = y1.compose(&y2).unwrap();
        let pi = testing::random_state(&mut rng, y1.in_info_space());
        let n = 200_000;
        let sample = sample_consecutive(&y1, &y2, &pi, n, 17, 2).unwrap();
        assert_eq!(sample.outcome_space().size(), 4);
        // analytic joint from the composed kernel
        for omega in 0..4 {
            for o in 0..2 {
                let p: f64 = (0..2)
                    .map(|t| composed.entry(omega, o, t) * pi.probability(t))
                    .sum();
                let z = z_score(p, sample.joint_counts()[omega][o], n);
                assert!(z.abs() <= 5.0, "cell ({omega},{o}): z = {z}");
            }
        }
    }

    #[test]
    fn two_stage_and_collapsed_sampling_agree_in_total_variation() {
        let obs = two_two();
        let pi = InformationState::new(obs.info_space().clone(), vec![0.3, 0.7]).unwrap();
        let n = 100_000;
        let two_stage = sample_experiment(&obs, &pi, n, 29, 1).unwrap();
        // collapsed: a trivial observable over a one-point space carrying
        // the analytic outcome distribution
        let nu = obs.outcome_distribution(&pi).unwrap();
        let point = FiniteSpace::new(["only"]).unwrap();
        let collapsed_obs = GeneralizedObservable::trivial(point.clone(), &nu);
        let delta = InformationState::dirac(point, 0).unwrap();
        let collapsed = sample_experiment(&collapsed_obs, &delta, n, 30, 1).unwrap();
        let tv = total_variation(&two_stage.frequencies(), &collapsed.frequencies());
        let bound = 4.0 * (obs.outcome_space().size() as f64 / n as f64).sqrt();
        assert!(tv <= bound, "tv = {tv}, bound = {bound}");
    }

    #[test]
    fn monte_carlo_oracle_reconstructs_kernels() {
        let obs = two_two();
        let mut oracle = monte_carlo_oracle(&obs, 100_000, 201);
        let rebuilt = GeneralizedObservable::from_experiment(&mut oracle).unwrap();
        // entrywise binomial bound at five sigmas
        for w in 0..2 {
            for t in 0..2 {
                let p = obs.entry(w, t);
                let sigma = binomial_sigma(p, 100_000);
                assert!((rebuilt.entry(w, t) - p).abs() <= 5.0 * sigma);
            }
        }
        // two distinct samplers estimate the same observable
        let mut other = monte_carlo_oracle(&obs, 100_000, 202);
        let rebuilt2 = GeneralizedObservable::from_experiment(&mut other).unwrap();
        let diff = rebuilt.max_kernel_diff(&rebuilt2).unwrap();
        assert!(diff <= 10.0 * binomial_sigma(0.5, 100_000));
    }

    #[test]
    fn zero_trials_is_rejected() {
        let obs = two_two();
        let pi = InformationState::uniform(obs.info_space().clone());
        assert!(matches!(
            sample_experiment(&obs, &pi, 0, 1, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn events_probe_cached_frequencies() {
        let obs = two_two();
        let mut oracle = monte_carlo_oracle(&obs, 10_000, 5);
        let pi = InformationState::uniform(obs.info_space().clone());
        let full = Event::full(obs.outcome_space().clone());
        assert!((oracle.probability(&full, &pi) - 1.0).abs() <= 1e-12);
        oracle.validate_probability_measure(&pi).unwrap();
    }
}
