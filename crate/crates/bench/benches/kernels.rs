use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use measurekit_core::quantum::hermitian_eigenvalues;
use measurekit_core::sampling::sample_experiment;
use measurekit_core::space::{Event, FiniteSpace};
use measurekit_core::testing;

fn bench_outcome_distribution(c: &mut Criterion) {
    let mut rng = testing::seeded_rng(1);
    let omega = FiniteSpace::indexed("w", 50).unwrap();
    let theta = FiniteSpace::indexed("t", 50).unwrap();
    let obs = testing::random_observable(&mut rng, &omega, &theta);
    let pi = testing::random_state(&mut rng, &theta);
    c.bench_function("outcome_distribution_50x50", |b| {
        b.iter(|| obs.outcome_distribution(black_box(&pi)).unwrap())
    });
}

fn bench_pull_back(c: &mut Criterion) {
    let mut rng = testing::seeded_rng(2);
    let omega = FiniteSpace::indexed("w", 30).unwrap();
    let theta = FiniteSpace::indexed("t", 30).unwrap();
    let theta_prime = FiniteSpace::indexed("s", 30).unwrap();
    let obs = testing::random_observable(&mut rng, &omega, &theta);
    let s = testing::random_observable(&mut rng, &theta, &theta_prime);
    c.bench_function("pull_back_30x30", |b| {
        b.iter(|| obs.pull_back(black_box(&s)).unwrap())
    });
}

fn bench_compose(c: &mut Criterion) {
    let mut rng = testing::seeded_rng(3);
    let y1 = testing::random_extended_sized(&mut rng, 6, 6, 6);
    let y2 = testing::random_extended_with(
        &mut rng,
        &FiniteSpace::indexed("v", 6).unwrap(),
        &FiniteSpace::indexed("z", 6).unwrap(),
        y1.out_info_space(),
    );
    c.bench_function("compose_6x6x6", |b| {
        b.iter(|| y1.compose(black_box(&y2)).unwrap())
    });
}

fn bench_posterior(c: &mut Criterion) {
    let mut rng = testing::seeded_rng(4);
    let y = testing::random_extended_sized(&mut rng, 10, 10, 10);
    let pi = testing::random_state(&mut rng, y.in_info_space());
    let event = Event::from_indices(y.outcome_space().clone(), &[0, 3, 7]).unwrap();
    c.bench_function("posterior_state_10x10x10", |b| {
        b.iter(|| {
            y.posterior_state(black_box(&event), black_box(&pi))
                .unwrap()
        })
    });
}

fn bench_sampling(c: &mut Criterion) {
    let mut rng = testing::seeded_rng(5);
    let omega = FiniteSpace::indexed("w", 8).unwrap();
    let theta = FiniteSpace::indexed("t", 8).unwrap();
    let obs = testing::random_observable(&mut rng, &omega, &theta);
    let pi = testing::random_state(&mut rng, &theta);
    c.bench_function("sample_experiment_10k", |b| {
        b.iter(|| sample_experiment(black_box(&obs), &pi, 10_000, 7, 1).unwrap())
    });
}

fn bench_state_update(c: &mut Criterion) {
    let mut rng = testing::seeded_rng(6);
    let instr = testing::random_kraus_instrument(&mut rng, 4, 3, 2);
    let rho = testing::random_density_matrix(&mut rng, 4);
    let event = Event::singleton(instr.outcome_space().clone(), 0).unwrap();
    c.bench_function("kraus_state_update_d4", |b| {
        b.iter(|| {
            instr
                .state_update(black_box(&event), black_box(&rho))
                .unwrap()
        })
    });
}

fn bench_choi_eigenvalues(c: &mut Criterion) {
    let mut rng = testing::seeded_rng(7);
    let instr = testing::random_kraus_instrument(&mut rng, 3, 2, 2);
    let choi = instr.choi_matrix(0).unwrap();
    c.bench_function("choi_eigenvalues_9x9", |b| {
        b.iter(|| hermitian_eigenvalues(black_box(&choi)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_outcome_distribution,
    bench_pull_back,
    bench_compose,
    bench_posterior,
    bench_sampling,
    bench_state_update,
    bench_choi_eigenvalues,
);
criterion_main!(benches);
