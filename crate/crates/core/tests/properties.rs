use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotorkick::basis::{build_cos_power, build_sin2_2theta};
use rotorkick::propagator::{max_abs, rotational_period, unitarity_error};
use rotorkick::{
    build_cos, build_cos2, build_j2, free_evolve, kick_unitary, propagate_state, real_span_rank, KickEvent, KickKind,
    RotorOperator, RotorOperatorF32, RotorState, RotorStateF32, C,
};

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> RotorState {
    let v = DVector::from_fn(dim, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    RotorState::normalized(v).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> RotorOperator {
    let a = DMatrix::from_fn(dim, dim, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    RotorOperator::from_matrix((&a + a.adjoint()) * C::new(0.5, 0.0)).unwrap()
}

fn hermiticity_gap(m: &DMatrix<C<f64>>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

fn close(a: &RotorState, b: &RotorState, tol: f64) -> bool {
    (a.amplitudes() - b.amplitudes()).camax() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_are_hermitian_with_contained_spectra(dim in 2usize..=40) {
        let cos = build_cos::<f64>(dim).unwrap();
        let cos2 = build_cos2::<f64>(dim).unwrap();
        let sin2 = build_sin2_2theta::<f64>(dim).unwrap();
        for op in [&cos, &cos2, &sin2] {
            prop_assert!(hermiticity_gap(op.matrix()) == 0.0);
        }
        let tol = 1e-12;
        prop_assert!(cos.spectrum().iter().all(|&l| l.abs() <= 1.0 + tol));
        prop_assert!(cos2.spectrum().iter().all(|&l| (-tol..=1.0 + tol).contains(&l)));
        prop_assert!(sin2.spectrum().iter().all(|&l| (-tol..=1.0 + tol).contains(&l)));
        let j2 = build_j2::<f64>(dim).unwrap();
        prop_assert_eq!(j2.entry(dim - 1, dim - 1).re, ((dim - 1) * dim) as f64);
    }

    #[test]
    fn powers_are_blocks_of_larger_bases(dim in 1usize..=20, p in 1u32..=4, extra in 0usize..5) {
        let small = build_cos_power::<f64>(dim, p).unwrap();
        let big = build_cos_power::<f64>(dim + extra, p).unwrap().block(dim).unwrap();
        prop_assert!(max_abs(&(small.matrix() - big.matrix())) < 1e-14);
    }

    #[test]
    fn norm_survives_random_schedules(seed in any::<u64>(), dim in 2usize..=12, count in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&mut rng, dim);
        let eps = rng.random_range(0.005..0.1);
        let mut s = 0.0;
        let mut kicks = Vec::new();
        for _ in 0..count {
            s += rng.random_range(0.0..2.0) * rotational_period(eps);
            let kind = if rng.random_bool(0.5) { KickKind::Orientation } else { KickKind::Alignment };
            kicks.push(KickEvent::new(s, rng.random_range(-3.0..3.0), kind).unwrap());
        }
        let out = propagate_state(&psi, &kicks, eps, 0.0, s + 1.0).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_evolution_composes_and_is_periodic(seed in any::<u64>(), dim in 1usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&mut rng, dim);
        let eps = rng.random_range(0.001..0.2);
        let (a, b) = (rng.random_range(0.0..200.0), rng.random_range(0.0..200.0));
        let split = free_evolve(&free_evolve(&psi, eps, a).unwrap(), eps, b).unwrap();
        let joint = free_evolve(&psi, eps, a + b).unwrap();
        // Rounding in εs is amplified by the top level energy.
        let tol = 1e-12 * (1.0 + (dim * dim) as f64 / 100.0);
        prop_assert!(close(&split, &joint, tol));
        let period = free_evolve(&psi, eps, rotational_period(eps)).unwrap();
        prop_assert!(close(&period, &psi, 1e-12));
    }

    #[test]
    fn kicks_are_unitary_groups_that_commute_with_their_generator(
        dim in 2usize..=25,
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        for op in [build_cos::<f64>(dim).unwrap(), build_cos2::<f64>(dim).unwrap()] {
            let ua = kick_unitary(&op, a).unwrap();
            let ub = kick_unitary(&op, b).unwrap();
            let uab = kick_unitary(&op, a + b).unwrap();
            prop_assert!(unitarity_error(&ua) < 1e-12);
            prop_assert!(max_abs(&(&ua * &ub - &uab)) < 1e-12);
            prop_assert!(max_abs(&(&ua * op.matrix() - op.matrix() * &ua)) < 1e-12);
            prop_assert!(max_abs(&(kick_unitary(&op, 0.0).unwrap() - DMatrix::identity(dim, dim))) < 1e-13);
        }
    }

    #[test]
    fn span_rank_is_invariant_under_unitary_conjugation(seed in any::<u64>(), dim in 2usize..=5, count in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mats: Vec<_> = (0..count).map(|_| random_hermitian(&mut rng, dim).into_matrix()).collect();
        let mut with_dup = mats.clone();
        with_dup.push(&mats[0] * C::new(2.0, 0.0) - &mats[count - 1]);
        let u = kick_unitary(&random_hermitian(&mut rng, dim), 1.3).unwrap();
        let rotated: Vec<_> = with_dup.iter().map(|m| &u * m * u.adjoint()).collect();
        let r = real_span_rank(&with_dup).unwrap();
        prop_assert_eq!(r, real_span_rank(&rotated).unwrap());
        prop_assert_eq!(r, count.min(dim * dim));
    }
}

#[test]
fn kick_at_a_fixed_seed_is_reproducible() {
    let mut a = ChaCha8Rng::seed_from_u64(7);
    let mut b = ChaCha8Rng::seed_from_u64(7);
    let (x, y) = (random_state(&mut a, 9), random_state(&mut b, 9));
    let k = KickEvent::new(0.3, 1.1, KickKind::Orientation).unwrap();
    let px = propagate_state(&x, &[k], 0.03, 0.0, 50.0).unwrap();
    let py = propagate_state(&y, &[k], 0.03, 0.0, 50.0).unwrap();
    assert_eq!(px.amplitudes(), py.amplitudes());
}

#[test]
fn single_precision_build() {
    let cos = RotorOperatorF32::from_matrix(build_cos::<f32>(6).unwrap().into_matrix()).unwrap();
    assert!((cos.entry(0, 1).re - 1.0 / 3f32.sqrt()).abs() < 1e-6);
    let psi = RotorStateF32::ground(6).unwrap();
    let k = rotorkick::propagator::KickEvent::<f32>::new(0.0, 1.0, KickKind::Orientation);
    let out = propagate_state(&psi, &[k.unwrap()], 0.03f32, 0.0, 40.0).unwrap();
    assert!((out.norm() - 1.0).abs() < 1e-5);
    assert!(unitarity_error(&kick_unitary(&cos, 0.7f32).unwrap()) < 1e-5);
    let double = propagate_state(
        &RotorState::ground(6).unwrap(),
        &[KickEvent::new(0.0, 1.0, KickKind::Orientation).unwrap()],
        0.03,
        0.0,
        40.0,
    )
    .unwrap();
    for j in 0..6 {
        assert!((out.population(j) as f64 - double.population(j)).abs() < 1e-5);
    }
}
