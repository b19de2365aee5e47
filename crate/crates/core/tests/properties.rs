//! Property suites over randomly generated model objects. Generation goes
//! through the crate's seeded helpers; proptest supplies seeds and sizes.

use measurekit_core::space::{Event, FiniteSpace};
use measurekit_core::testing::{
    self, max_abs_diff, random_extended_sized, random_observable, random_state,
};
use measurekit_core::{FiniteMeasure, InformationState};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_is_scale_invariant(seed: u64, n in 1usize..12, scale in 1e-6f64..1e6) {
        let mut rng = testing::seeded_rng(seed);
        let space = FiniteSpace::indexed("t", n).unwrap();
        let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-6).collect();
        let m = FiniteMeasure::new(space, weights).unwrap();
        let base = m.normalize().unwrap();
        let scaled = m.scale(scale).unwrap().normalize().unwrap();
        prop_assert!(base.approx_eq(&scaled));
        // powers of two rescale without rounding at all
        let pow2 = m.scale(64.0).unwrap().normalize().unwrap();
        prop_assert_eq!(base.probabilities(), pow2.probabilities());
    }

    #[test]
    fn measure_is_additive_on_disjoint_events(seed: u64, n in 1usize..16) {
        let mut rng = testing::seeded_rng(seed);
        let space = FiniteSpace::indexed("t", n).unwrap();
        let pi = random_state(&mut rng, &space);
        let mask_a: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.4).collect();
        let mask_b: Vec<bool> = mask_a.iter().map(|&a| !a && rng.random::<f64>() < 0.5).collect();
        let a = Event::new(space.clone(), mask_a).unwrap();
        let b = Event::new(space.clone(), mask_b).unwrap();
        prop_assert!(a.is_disjoint(&b));
        let union = pi.measure_of(&a.union(&b).unwrap()).unwrap();
        let split = pi.measure_of(&a).unwrap() + pi.measure_of(&b).unwrap();
        prop_assert!((union - split).abs() <= 1e-12);
    }

    #[test]
    fn mix_flattens_with_composed_weights(
        seed: u64,
        n in 1usize..10,
        inner_w in 0.0f64..1.0,
        outer_w in 0.0f64..1.0,
    ) {
        let mut rng = testing::seeded_rng(seed);
        let space = FiniteSpace::indexed("t", n).unwrap();
        let p1 = random_state(&mut rng, &space);
        let p2 = random_state(&mut rng, &space);
        let p3 = random_state(&mut rng, &space);
        let inner = InformationState::mix(
            &[p1.clone(), p2.clone()],
            &[inner_w, 1.0 - inner_w],
        ).unwrap();
        let nested = InformationState::mix(
            &[inner, p3.clone()],
            &[outer_w, 1.0 - outer_w],
        ).unwrap();
        let flat = InformationState::mix(
            &[p1, p2, p3],
            &[outer_w * inner_w, outer_w * (1.0 - inner_w), 1.0 - outer_w],
        ).unwrap();
        prop_assert!(max_abs_diff(nested.probabilities(), flat.probabilities()) <= 1e-12);
    }

    #[test]
    fn outcome_distributions_mix_affinely(
        seed: u64,
        n_out in 1usize..9,
        n_in in 1usize..9,
        alpha in 0.0f64..1.0,
    ) {
        let mut rng = testing::seeded_rng(seed);
        let omega = FiniteSpace::indexed("w", n_out).unwrap();
        let theta = FiniteSpace::indexed("t", n_in).unwrap();
        let obs = random_observable(&mut rng, &omega, &theta);
        let p1 = random_state(&mut rng, &theta);
        let p2 = random_state(&mut rng, &theta);
        let mixed = InformationState::mix(&[p1.clone(), p2.clone()], &[alpha, 1.0 - alpha]).unwrap();
        let lhs = obs.outcome_distribution(&mixed).unwrap();
        let d1 = obs.outcome_distribution(&p1).unwrap();
        let d2 = obs.outcome_distribution(&p2).unwrap();
        for w in 0..n_out {
            let rhs = alpha * d1.probability(w) + (1.0 - alpha) * d2.probability(w);
            prop_assert!((lhs.probability(w) - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn product_marginals_recover_the_factors(
        seed: u64,
        n1 in 1usize..8,
        n2 in 1usize..8,
        n_in in 1usize..8,
    ) {
        let mut rng = testing::seeded_rng(seed);
        let theta = FiniteSpace::indexed("t", n_in).unwrap();
        let o1 = random_observable(&mut rng, &FiniteSpace::indexed("a", n1).unwrap(), &theta);
        let o2 = random_observable(&mut rng, &FiniteSpace::indexed("b", n2).unwrap(), &theta);
        let joint = o1.product(&o2).unwrap();
        prop_assert!(joint.marginal(0).unwrap().max_kernel_diff(&o1).unwrap() <= 1e-12);
        prop_assert!(joint.marginal(1).unwrap().max_kernel_diff(&o2).unwrap() <= 1e-12);
    }

    #[test]
    fn instrument_totals_match_the_outcome_marginal(
        seed: u64,
        n_w in 1usize..7,
        n_out in 1usize..7,
        n_in in 1usize..7,
    ) {
        let mut rng = testing::seeded_rng(seed);
        let y = {
            let omega = FiniteSpace::indexed("w", n_w).unwrap();
            let out = FiniteSpace::indexed("u", n_out).unwrap();
            let t_in = FiniteSpace::indexed("t", n_in).unwrap();
            testing::random_extended_with(&mut rng, &omega, &out, &t_in)
        };
        let pi = random_state(&mut rng, y.in_info_space());
        let mask: Vec<bool> = (0..n_w).map(|_| rng.random::<f64>() < 0.5).collect();
        let event = Event::new(y.outcome_space().clone(), mask).unwrap();
        let via_marginal = y
            .outcome_marginal()
            .outcome_distribution(&pi)
            .unwrap()
            .measure_of(&event)
            .unwrap();
        let via_instrument = y.instrument_apply(&event, &pi.to_measure()).unwrap().total();
        prop_assert!((via_marginal - via_instrument).abs() <= 1e-12);
    }

    #[test]
    fn posteriors_are_probability_vectors(seed: u64, n in 2usize..7) {
        let mut rng = testing::seeded_rng(seed);
        let y = random_extended_sized(&mut rng, n, n, n);
        let pi = random_state(&mut rng, y.in_info_space());
        for w in 0..n {
            let event = Event::singleton(y.outcome_space().clone(), w).unwrap();
            if let Ok(post) = y.posterior_state(&event, &pi) {
                let sum: f64 = post.probabilities().iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12);
                prop_assert!(post.probabilities().iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn triviality_coincides_with_distribution_invariance(
        seed: u64,
        n_out in 1usize..7,
        n_in in 2usize..7,
        make_trivial: bool,
    ) {
        let mut rng = testing::seeded_rng(seed);
        let omega = FiniteSpace::indexed("w", n_out).unwrap();
        let theta = FiniteSpace::indexed("t", n_in).unwrap();
        let obs = if make_trivial {
            let nu = random_state(&mut rng, &omega);
            measurekit_core::GeneralizedObservable::trivial(theta.clone(), &nu)
        } else {
            random_observable(&mut rng, &omega, &theta)
        };
        let baseline = obs
            .outcome_distribution(&random_state(&mut rng, &theta))
            .unwrap();
        let mut invariant = true;
        for _ in 0..50 {
            let pi = random_state(&mut rng, &theta);
            let p = obs.outcome_distribution(&pi).unwrap();
            if max_abs_diff(p.probabilities(), baseline.probabilities()) > 1e-12 {
                invariant = false;
                break;
            }
        }
        prop_assert_eq!(obs.is_trivial(), invariant);
    }

    #[test]
    fn compose_matches_sequential_application(seed: u64, n in 2usize..5) {
        let mut rng = testing::seeded_rng(seed);
        let y1 = random_extended_sized(&mut rng, n, n, n);
        let y2 = testing::random_extended_with(
            &mut rng,
            &FiniteSpace::indexed("v", n).unwrap(),
            &FiniteSpace::indexed("z", n).unwrap(),
            y1.out_info_space(),
        );
        let composed = y1.compose(&y2).unwrap();
        let pi = random_state(&mut rng, y1.in_info_space());
        let b1 = Event::singleton(y1.outcome_space().clone(), rng.random_range(0..n)).unwrap();
        let b2 = Event::singleton(y2.outcome_space().clone(), rng.random_range(0..n)).unwrap();
        let rect = Event::rectangle(composed.outcome_space().clone(), &b1, &b2).unwrap();
        let direct = composed.instrument_apply(&rect, &pi.to_measure()).unwrap();
        let chained = y2
            .instrument_apply(&b2, &y1.instrument_apply(&b1, &pi.to_measure()).unwrap())
            .unwrap();
        prop_assert!(max_abs_diff(direct.weights(), chained.weights()) <= 1e-12);
    }
}
