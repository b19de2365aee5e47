//! Pipeline execution: resolves a config into model objects, runs the
//! steps in order, evaluates queries and checks, and assembles the report.

use std::path::Path;

use rand::Rng;

use crate::harness::config::{matrix_def, CheckDef, ConfigFile, Model, QueryDef, StepDef};
use crate::harness::report::{CheckResult, Report, ResultEntry};
use crate::instrument::ExtendedObservable;
use crate::mean_state::posterior_mean;
use crate::observable::GeneralizedObservable;
use crate::quantum::{hermitian_eigenvalues, EIGEN_TOLERANCE};
use crate::sampling::{
    sample_consecutive, sample_experiment, sample_instrument, z_score, DEFAULT_SIGMA_BOUND,
};
use crate::space::Event;
use crate::testing::{random_state, seeded_rng};
use crate::{tolerance, Error, InformationState, Result};

const FALLBACK_SEED: u64 = 20240101;
const FALLBACK_TRIALS: usize = 100_000;
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            trials: None,
            workers: 1,
        }
    }
}

pub fn run_config(path: &Path, options: &RunOptions) -> Result<Report> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
    run_config_source(&source, options)
}

pub fn validate_config(path: &Path) -> Result<Report> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
    validate_config_source(&source)
}

/// Parses and validates every declaration and reference without executing
/// anything.
pub fn validate_config_source(source: &str) -> Result<Report> {
    let config = ConfigFile::parse(source)?;
    let model = Model::build(&config)?;
    check_references(&config, &model)?;
    Ok(Report {
        seed: config.seed.unwrap_or(FALLBACK_SEED),
        trials: config.trials.unwrap_or(FALLBACK_TRIALS),
        declarations: model.declarations,
        results: Vec::new(),
        checks: Vec::new(),
        passed: true,
    })
}

/// Runs the full pipeline. Parse and validation problems are errors; a
/// failing check or sampling comparison is a normal report with
/// `passed = false`.
pub fn run_config_source(source: &str, options: &RunOptions) -> Result<Report> {
    let config = ConfigFile::parse(source)?;
    let mut model = Model::build(&config)?;
    check_references(&config, &model)?;
    let seed = options.seed.or(config.seed).unwrap_or(FALLBACK_SEED);
    let trials = options.trials.or(config.trials).unwrap_or(FALLBACK_TRIALS);
    let sigma_bound = config.sigma_bound.unwrap_or(DEFAULT_SIGMA_BOUND);
    let workers = options.workers.max(1);

    let mut results: Vec<ResultEntry> = Vec::new();
    let mut current: Option<InformationState> = None;
    let mut target: Option<SampleTarget> = None;

    for (index, step) in config.pipeline.iter().enumerate() {
        run_step(
            step,
            index,
            &mut model,
            &mut results,
            &mut current,
            &mut target,
            seed,
            trials,
            sigma_bound,
            workers,
        )
        .map_err(|e| match e {
            Error::Validation(_) | Error::ConfigParse(_) => e,
            other => Error::Validation(format!("pipeline step {index}: {other}")),
        })?;
    }

    for (index, query) in config.queries.iter().enumerate() {
        let entry = run_query(query, &model).map_err(|e| match e {
            Error::Validation(_) => e,
            other => Error::Validation(format!("query {index}: {other}")),
        })?;
        results.push(entry);
    }

    let mut checks: Vec<CheckResult> = Vec::new();
    for (index, check) in config.checks.iter().enumerate() {
        let outcome = run_check(check, &model, seed, index).map_err(|e| match e {
            Error::Validation(_) => e,
            other => Error::Validation(format!("check {index}: {other}")),
        })?;
        checks.push(outcome);
    }

    let passed = checks.iter().all(|c| c.passed) && results.iter().all(ResultEntry::passed);
    Ok(Report {
        seed,
        trials,
        declarations: std::mem::take(&mut model.declarations),
        results,
        checks,
        passed,
    })
}

enum SampleTarget {
    Observable {
        name: String,
        obs: GeneralizedObservable,
        state: InformationState,
    },
    Instrument {
        name: String,
        y: ExtendedObservable,
        state: InformationState,
    },
}

/// Every name referenced by the pipeline, queries and checks must resolve
/// before anything runs; names minted by compose steps count from their
/// step onwards.
fn check_references(config: &ConfigFile, model: &Model) -> Result<()> {
    let mut extended: Vec<&str> = model.extended.iter().map(|(n, _)| n.as_str()).collect();
    let resolve = |found: bool, place: &str, kind: &str, name: &str| {
        if found {
            Ok(())
        } else {
            Err(Error::Validation(format!("{place}: unknown {kind} `{name}`")))
        }
    };
    for (index, step) in config.pipeline.iter().enumerate() {
        let place = format!("pipeline step {index}");
        match step {
            StepDef::SetState { state } => {
                resolve(model.state(state).is_ok(), &place, "state", state)?;
            }
            StepDef::ApplyObservable { observable } => {
                resolve(model.observable(observable).is_ok(), &place, "observable", observable)?;
            }
            StepDef::ApplyInstrument { extended: name } => {
                resolve(extended.contains(&name.as_str()), &place, "extended observable", name)?;
            }
            StepDef::Compose { first, second, name } => {
                resolve(extended.contains(&first.as_str()), &place, "extended observable", first)?;
                resolve(
                    extended.contains(&second.as_str()),
                    &place,
                    "extended observable",
                    second,
                )?;
                if extended.contains(&name.as_str()) {
                    return Err(Error::Validation(format!(
                        "{place}: composed name `{name}` is already declared"
                    )));
                }
                extended.push(name);
            }
            StepDef::SampleConsecutive { first, second, .. } => {
                resolve(extended.contains(&first.as_str()), &place, "extended observable", first)?;
                resolve(
                    extended.contains(&second.as_str()),
                    &place,
                    "extended observable",
                    second,
                )?;
            }
            StepDef::Condition { .. } | StepDef::Sample { .. } => {}
        }
    }
    for (index, query) in config.queries.iter().enumerate() {
        let place = format!("query {index}");
        match query {
            QueryDef::Distribution { observable, state } => {
                resolve(model.observable(observable).is_ok(), &place, "observable", observable)?;
                resolve(model.state(state).is_ok(), &place, "state", state)?;
            }
            QueryDef::Value { observable, .. } => {
                resolve(model.observable(observable).is_ok(), &place, "observable", observable)?;
            }
            QueryDef::Posterior { extended: name, state, .. } => {
                resolve(extended.contains(&name.as_str()), &place, "extended observable", name)?;
                resolve(model.state(state).is_ok(), &place, "state", state)?;
            }
            QueryDef::Mean { embedded, state } => {
                resolve(model.embedded(embedded).is_ok(), &place, "embedded space", embedded)?;
                resolve(model.state(state).is_ok(), &place, "state", state)?;
            }
            QueryDef::PosteriorMean { extended: name, embedded_out, state, .. } => {
                resolve(extended.contains(&name.as_str()), &place, "extended observable", name)?;
                resolve(
                    model.embedded(embedded_out).is_ok(),
                    &place,
                    "embedded space",
                    embedded_out,
                )?;
                resolve(model.state(state).is_ok(), &place, "state", state)?;
            }
            QueryDef::Born { povm, state, .. } => {
                resolve(model.povm(povm).is_ok(), &place, "povm", povm)?;
                resolve(model.density(state).is_ok(), &place, "density matrix", state)?;
            }
            QueryDef::StateUpdate { instrument, state, .. } => {
                resolve(model.instrument(instrument).is_ok(), &place, "instrument", instrument)?;
                resolve(model.density(state).is_ok(), &place, "density matrix", state)?;
            }
        }
    }
    for (index, check) in config.checks.iter().enumerate() {
        let place = format!("check {index}");
        match check {
            CheckDef::Affinity { observable, .. }
            | CheckDef::IsTrivial { observable, .. }
            | CheckDef::IsImage { observable, .. } => {
                resolve(model.observable(observable).is_ok(), &place, "observable", observable)?;
            }
            CheckDef::NonPerturbing { extended: name, .. }
            | CheckDef::InstrumentNormalization { extended: name, .. } => {
                resolve(extended.contains(&name.as_str()), &place, "extended observable", name)?;
            }
            CheckDef::ChoiPsd { instrument } => {
                resolve(model.instrument(instrument).is_ok(), &place, "instrument", instrument)?;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_step(
    step: &StepDef,
    index: usize,
    model: &mut Model,
    results: &mut Vec<ResultEntry>,
    current: &mut Option<InformationState>,
    target: &mut Option<SampleTarget>,
    base_seed: u64,
    default_trials: usize,
    default_bound: f64,
    workers: usize,
) -> Result<()> {
    let need_state = |current: &Option<InformationState>| {
        current.clone().ok_or_else(|| {
            Error::Validation(format!(
                "pipeline step {index} needs a current state; add a set_state step first"
            ))
        })
    };
    let step_seed = |explicit: Option<u64>| {
        explicit.unwrap_or(base_seed.wrapping_add((index as u64 + 1).wrapping_mul(SEED_STRIDE)))
    };

    match step {
        StepDef::SetState { state } => {
            *current = Some(model.state(state)?.clone());
        }
        StepDef::ApplyObservable { observable } => {
            let obs = model.observable(observable)?.clone();
            let state = need_state(current)?;
            let distribution = obs.outcome_distribution(&state)?;
            results.push(ResultEntry::Distribution {
                source: observable.clone(),
                labels: distribution.space().labels().to_vec(),
                probabilities: distribution.probabilities().to_vec(),
            });
            *target = Some(SampleTarget::Observable {
                name: observable.clone(),
                obs,
                state,
            });
            *current = Some(distribution);
        }
        StepDef::ApplyInstrument { extended } => {
            let y = model.extended(extended)?.clone();
            let state = need_state(current)?;
            let joint = y.joint_observable()?.outcome_distribution(&state)?;
            results.push(ResultEntry::Distribution {
                source: format!("{extended} (joint)"),
                labels: joint.space().labels().to_vec(),
                probabilities: joint.probabilities().to_vec(),
            });
            let unconditional =
                y.posterior_state(&Event::full(y.outcome_space().clone()), &state)?;
            *target = Some(SampleTarget::Instrument {
                name: extended.clone(),
                y,
                state,
            });
            *current = Some(unconditional);
        }
        StepDef::Condition { event } => {
            let Some(SampleTarget::Instrument { name, y, state }) = target.as_ref() else {
                return Err(Error::Validation(format!(
                    "pipeline step {index}: condition needs a preceding apply_instrument"
                )));
            };
            let event = Event::from_labels(y.outcome_space().clone(), event)?;
            let probability = y.outcome_probability(&event, state)?;
            let posterior = y.posterior_state(&event, state)?;
            results.push(ResultEntry::Posterior {
                source: name.clone(),
                event: event.labels(),
                probability,
                labels: posterior.space().labels().to_vec(),
                probabilities: posterior.probabilities().to_vec(),
            });
            *current = Some(posterior);
        }
        StepDef::Compose {
            first,
            second,
            name,
        } => {
            let composed = model.extended(first)?.compose(model.extended(second)?)?;
            results.push(ResultEntry::Composed {
                name: name.clone(),
                outcomes: composed.outcome_space().labels().to_vec(),
            });
            model.add_extended(name, composed)?;
        }
        StepDef::Sample {
            trials,
            seed,
            sigma_bound,
        } => {
            let Some(sample_target) = target.as_ref() else {
                return Err(Error::Validation(format!(
                    "pipeline step {index}: sample needs a preceding apply step"
                )));
            };
            let n = trials.unwrap_or(default_trials);
            let seed = step_seed(*seed);
            let bound = sigma_bound.unwrap_or(default_bound);
            let entry = match sample_target {
                SampleTarget::Observable { name, obs, state } => {
                    let sample = sample_experiment(obs, state, n, seed, workers)?;
                    let analytic = obs.outcome_distribution(state)?.probabilities().to_vec();
                    sampling_entry(
                        name.clone(),
                        n,
                        seed,
                        bound,
                        obs.outcome_space().labels().to_vec(),
                        analytic,
                        sample.counts().to_vec(),
                    )
                }
                SampleTarget::Instrument { name, y, state } => {
                    let sample = sample_instrument(y, state, n, seed, workers)?;
                    let joint = y.joint_observable()?;
                    let analytic = joint.outcome_distribution(state)?.probabilities().to_vec();
                    let counts: Vec<u64> =
                        sample.joint_counts().iter().flatten().copied().collect();
                    sampling_entry(
                        name.clone(),
                        n,
                        seed,
                        bound,
                        joint.outcome_space().labels().to_vec(),
                        analytic,
                        counts,
                    )
                }
            };
            results.push(entry);
        }
        StepDef::SampleConsecutive {
            first,
            second,
            trials,
            seed,
            sigma_bound,
        } => {
            let y1 = model.extended(first)?.clone();
            let y2 = model.extended(second)?.clone();
            let state = need_state(current)?;
            let n = trials.unwrap_or(default_trials);
            let seed = step_seed(*seed);
            let bound = sigma_bound.unwrap_or(default_bound);
            let composed = y1.compose(&y2)?;
            let joint = composed.joint_observable()?;
            let analytic = joint.outcome_distribution(&state)?.probabilities().to_vec();
            let sample = sample_consecutive(&y1, &y2, &state, n, seed, workers)?;
            let counts: Vec<u64> = sample.joint_counts().iter().flatten().copied().collect();
            results.push(sampling_entry(
                format!("{first}>>{second}"),
                n,
                seed,
                bound,
                joint.outcome_space().labels().to_vec(),
                analytic,
                counts,
            ));
        }
    }
    Ok(())
}

fn sampling_entry(
    source: String,
    trials: usize,
    seed: u64,
    bound: f64,
    labels: Vec<String>,
    analytic: Vec<f64>,
    counts: Vec<u64>,
) -> ResultEntry {
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let z_scores: Vec<f64> = analytic
        .iter()
        .zip(&counts)
        .map(|(&p, &c)| z_score(p, c, trials))
        .collect();
    let max_abs_z = z_scores.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let passed = max_abs_z <= bound;
    ResultEntry::Sampling {
        source,
        trials,
        seed,
        labels,
        analytic,
        empirical,
        z_scores,
        max_abs_z,
        bound,
        passed,
    }
}

fn run_query(query: &QueryDef, model: &Model) -> Result<ResultEntry> {
    match query {
        QueryDef::Distribution { observable, state } => {
            let obs = model.observable(observable)?;
            let pi = model.state(state)?;
            let distribution = obs.outcome_distribution(pi)?;
            Ok(ResultEntry::Distribution {
                source: format!("{observable}({state})"),
                labels: distribution.space().labels().to_vec(),
                probabilities: distribution.probabilities().to_vec(),
            })
        }
        QueryDef::Value { observable, event } => {
            let obs = model.observable(observable)?;
            let event = Event::from_labels(obs.outcome_space().clone(), event)?;
            let values = obs.value(&event)?;
            Ok(ResultEntry::Value {
                source: observable.clone(),
                event: event.labels(),
                values,
            })
        }
        QueryDef::Posterior {
            extended,
            state,
            event,
        } => {
            let y = model.extended(extended)?;
            let pi = model.state(state)?;
            let event = Event::from_labels(y.outcome_space().clone(), event)?;
            let probability = y.outcome_probability(&event, pi)?;
            let posterior = y.posterior_state(&event, pi)?;
            Ok(ResultEntry::Posterior {
                source: format!("{extended}({state})"),
                event: event.labels(),
                probability,
                labels: posterior.space().labels().to_vec(),
                probabilities: posterior.probabilities().to_vec(),
            })
        }
        QueryDef::Mean { embedded, state } => {
            let embedding = model.embedded(embedded)?;
            let pi = model.state(state)?;
            let eta = embedding.mean_state(pi)?;
            Ok(ResultEntry::Mean {
                source: format!("{embedded}({state})"),
                vector: eta.vector().to_vec(),
            })
        }
        QueryDef::PosteriorMean {
            extended,
            embedded_out,
            state,
            event,
        } => {
            let y = model.extended(extended)?;
            let embedding = model.embedded(embedded_out)?;
            let pi = model.state(state)?;
            let event = Event::from_labels(y.outcome_space().clone(), event)?;
            let eta = posterior_mean(y, embedding, &event, pi)?;
            Ok(ResultEntry::Mean {
                source: format!("{extended}({state}) | {{{}}}", event.labels().join(", ")),
                vector: eta.vector().to_vec(),
            })
        }
        QueryDef::Born { povm, state, event } => {
            let povm_obj = model.povm(povm)?;
            let rho = model.density(state)?;
            let event = match event {
                Some(labels) => Event::from_labels(povm_obj.outcome_space().clone(), labels)?,
                None => Event::full(povm_obj.outcome_space().clone()),
            };
            let probability = povm_obj.born_probability(rho, &event)?;
            Ok(ResultEntry::Born {
                source: format!("{povm}({state})"),
                event: event.labels(),
                probability,
            })
        }
        QueryDef::StateUpdate {
            instrument,
            state,
            event,
        } => {
            let instr = model.instrument(instrument)?;
            let rho = model.density(state)?;
            let event = Event::from_labels(instr.outcome_space().clone(), event)?;
            let (probability, updated) = instr.state_update(&event, rho)?;
            Ok(ResultEntry::StateUpdate {
                source: format!("{instrument}({state})"),
                event: event.labels(),
                probability,
                matrix: matrix_def(updated.matrix()),
            })
        }
    }
}

fn run_check(check: &CheckDef, model: &Model, base_seed: u64, index: usize) -> Result<CheckResult> {
    let check_seed = |explicit: Option<u64>| {
        explicit
            .unwrap_or(base_seed.wrapping_add((0x1000 + index as u64).wrapping_mul(SEED_STRIDE)))
    };
    match check {
        CheckDef::Affinity {
            observable,
            samples,
            seed,
        } => {
            let obs = model.observable(observable)?;
            let mut rng = seeded_rng(check_seed(*seed));
            let samples = samples.unwrap_or(20);
            let mut residual = 0.0f64;
            for _ in 0..samples {
                let pi1 = random_state(&mut rng, obs.info_space());
                let pi2 = random_state(&mut rng, obs.info_space());
                let alpha: f64 = rng.random();
                let mixed =
                    InformationState::mix(&[pi1.clone(), pi2.clone()], &[alpha, 1.0 - alpha])?;
                let lhs = obs.outcome_distribution(&mixed)?;
                let p1 = obs.outcome_distribution(&pi1)?;
                let p2 = obs.outcome_distribution(&pi2)?;
                for w in 0..obs.outcome_space().size() {
                    let rhs = alpha * p1.probability(w) + (1.0 - alpha) * p2.probability(w);
                    residual = residual.max((lhs.probability(w) - rhs).abs());
                }
            }
            let bound = tolerance();
            Ok(CheckResult {
                name: format!("affinity({observable})"),
                passed: residual <= bound,
                residual,
                bound,
                detail: format!("{samples} random mixtures"),
            })
        }
        CheckDef::IsTrivial { observable, expect } => {
            let obs = model.observable(observable)?;
            let residual = column_spread(obs);
            let got = obs.is_trivial();
            Ok(CheckResult {
                name: format!("is_trivial({observable})"),
                passed: got == *expect,
                residual,
                bound: tolerance(),
                detail: format!("got {got}, expected {expect}; residual is the column spread"),
            })
        }
        CheckDef::IsImage { observable, expect } => {
            let obs = model.observable(observable)?;
            let got = obs.as_image_map().is_some();
            Ok(CheckResult {
                name: format!("is_image({observable})"),
                passed: got == *expect,
                residual: if got == *expect { 0.0 } else { 1.0 },
                bound: 0.0,
                detail: format!("got {got}, expected {expect}"),
            })
        }
        CheckDef::NonPerturbing { extended, expect } => {
            let y = model.extended(extended)?;
            let product = ExtendedObservable::product(&y.outcome_marginal(), &y.system_marginal())?;
            let residual = y.max_kernel_diff(&product);
            let got = y.is_non_perturbing();
            Ok(CheckResult {
                name: format!("non_perturbing({extended})"),
                passed: got == *expect,
                residual,
                bound: tolerance(),
                detail: format!("got {got}, expected {expect}; residual is the factorization gap"),
            })
        }
        CheckDef::InstrumentNormalization {
            extended,
            samples,
            seed,
        } => {
            let y = model.extended(extended)?;
            let mut rng = seeded_rng(check_seed(*seed));
            let samples = samples.unwrap_or(50);
            let marginal = y.outcome_marginal();
            let mut residual = 0.0f64;
            for _ in 0..samples {
                let pi = random_state(&mut rng, y.in_info_space());
                let full = Event::full(y.outcome_space().clone());
                residual = residual.max((y.outcome_probability(&full, &pi)? - 1.0).abs());
                // random event: measure through the marginal versus the
                // instrument total
                let mask: Vec<bool> = (0..y.outcome_space().size())
                    .map(|_| rng.random::<f64>() < 0.5)
                    .collect();
                let event = Event::new(y.outcome_space().clone(), mask)?;
                let via_marginal = marginal.outcome_distribution(&pi)?.measure_of(&event)?;
                let via_instrument = y.outcome_probability(&event, &pi)?;
                residual = residual.max((via_marginal - via_instrument).abs());
            }
            let bound = tolerance();
            Ok(CheckResult {
                name: format!("instrument_normalization({extended})"),
                passed: residual <= bound,
                residual,
                bound,
                detail: format!("{samples} random states"),
            })
        }
        CheckDef::ChoiPsd { instrument } => {
            let instr = model.instrument(instrument)?;
            let mut min_eigen = f64::INFINITY;
            for w in 0..instr.outcome_space().size() {
                let choi = instr.choi_matrix(w)?;
                let eigen = hermitian_eigenvalues(&choi)?;
                min_eigen = min_eigen.min(eigen.first().copied().unwrap_or(0.0));
            }
            let residual = (-min_eigen).max(0.0);
            Ok(CheckResult {
                name: format!("choi_psd({instrument})"),
                passed: residual <= EIGEN_TOLERANCE,
                residual,
                bound: EIGEN_TOLERANCE,
                detail: format!("minimum Choi eigenvalue {min_eigen:.3e}"),
            })
        }
    }
}

fn column_spread(obs: &GeneralizedObservable) -> f64 {
    let mut spread = 0.0f64;
    for row in obs.kernel() {
        for &k in row {
            spread = spread.max((k - row[0]).abs());
        }
    }
    spread
}
