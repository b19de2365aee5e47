//! Seeded generators of random model objects, shared by the test suites
//! and benchmarks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::instrument::ExtendedObservable;
use crate::observable::GeneralizedObservable;
use crate::quantum::{hermitian_eigen, CMatrix, DensityMatrix, KrausInstrument};
use crate::space::FiniteSpace;
use crate::InformationState;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest absolute componentwise difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Normalized uniform weights, bounded away from zero.
pub fn random_probabilities(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    w
}

pub fn random_state(rng: &mut ChaCha8Rng, space: &FiniteSpace) -> InformationState {
    InformationState::new(space.clone(), random_probabilities(rng, space.size()))
        .expect("random probabilities are normalized")
}

/// Random column-stochastic kernel between the given spaces.
pub fn random_observable(
    rng: &mut ChaCha8Rng,
    outcome_space: &FiniteSpace,
    info_space: &FiniteSpace,
) -> GeneralizedObservable {
    let n_out = outcome_space.size();
    let n_in = info_space.size();
    let mut kernel = vec![vec![0.0; n_in]; n_out];
    for t in 0..n_in {
        let column = random_probabilities(rng, n_out);
        for (w, &p) in column.iter().enumerate() {
            kernel[w][t] = p;
        }
    }
    GeneralizedObservable::new(outcome_space.clone(), info_space.clone(), kernel)
        .expect("random kernel is column-stochastic")
}

/// Random extended observable over the given spaces: per input point a
/// normalized joint distribution on compound outcomes.
pub fn random_extended_with(
    rng: &mut ChaCha8Rng,
    outcome_space: &FiniteSpace,
    out_info_space: &FiniteSpace,
    in_info_space: &FiniteSpace,
) -> ExtendedObservable {
    let (n_w, n_out, n_in) = (
        outcome_space.size(),
        out_info_space.size(),
        in_info_space.size(),
    );
    let mut kernel = vec![vec![vec![0.0; n_in]; n_out]; n_w];
    for t_in in 0..n_in {
        let joint = random_probabilities(rng, n_w * n_out);
        for w in 0..n_w {
            for o in 0..n_out {
                kernel[w][o][t_in] = joint[w * n_out + o];
            }
        }
    }
    ExtendedObservable::new(
        outcome_space.clone(),
        out_info_space.clone(),
        in_info_space.clone(),
        kernel,
    )
    .expect("random extended kernel is normalized")
}

/// Random extended observable with auto-labeled spaces of the given sizes.
pub fn random_extended_sized(
    rng: &mut ChaCha8Rng,
    n_outcomes: usize,
    n_out: usize,
    n_in: usize,
) -> ExtendedObservable {
    let omega = FiniteSpace::indexed("w", n_outcomes).unwrap();
    let theta_out = FiniteSpace::indexed("u", n_out).unwrap();
    let theta_in = FiniteSpace::indexed("t", n_in).unwrap();
    random_extended_with(rng, &omega, &theta_out, &theta_in)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    CMatrix::new(rows, cols, data).unwrap()
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d).map(|_| complex_normal(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Random full-rank density matrix (normalized Wishart).
pub fn random_density_matrix(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let g = ginibre(rng, d, d);
    let w = g.matmul(&g.adjoint()).unwrap();
    let trace = w.trace().re;
    DensityMatrix::new(w.scale(Complex64::new(1.0 / trace, 0.0)).hermitized())
        .expect("normalized Wishart matrix is a density matrix")
}

/// Random trace-preserving Kraus instrument: Gaussian operators, globally
/// renormalized through the inverse square root of their total effect.
pub fn random_kraus_instrument(
    rng: &mut ChaCha8Rng,
    d: usize,
    n_outcomes: usize,
    ops_per_outcome: usize,
) -> KrausInstrument {
    let space = FiniteSpace::indexed("k", n_outcomes).unwrap();
    let raw: Vec<Vec<CMatrix>> = (0..n_outcomes)
        .map(|_| (0..ops_per_outcome).map(|_| ginibre(rng, d, d)).collect())
        .collect();
    let mut total = CMatrix::zeros(d, d);
    for ops in &raw {
        for op in ops {
            total = &total + &op.adjoint().matmul(op).unwrap();
        }
    }
    let (values, vectors) = hermitian_eigen(&total.hermitized()).unwrap();
    // total^(-1/2) = V diag(1/sqrt(lambda)) V*
    let mut inv_sqrt = CMatrix::zeros(d, d);
    for (k, &lambda) in values.iter().enumerate() {
        let col: Vec<Complex64> = (0..d).map(|r| vectors.get(r, k)).collect();
        let outer = CMatrix::outer(&col, &col);
        inv_sqrt = &inv_sqrt + &outer.scale(Complex64::new(1.0 / lambda.sqrt(), 0.0));
    }
    let kraus = raw
        .into_iter()
        .map(|ops| {
            ops.into_iter()
                .map(|op| op.matmul(&inv_sqrt).unwrap())
                .collect()
        })
        .collect();
    KrausInstrument::new(space, kraus).expect("renormalized operators are trace preserving")
}
