use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotorkick::experiments::{fig9_train, DelayMoments, TrainConfig};
use rotorkick::lie::ad_residual_in_closure;
use rotorkick::propagator::units;
use rotorkick::target::target_for;
use rotorkick::{
    ad_sequence, build_cos, build_j2, dim_v, efficiency_duration_scan, embed_or_truncate, expectation, kick_unitary,
    lie_closure_dim, lie_report, observable, propagate_state, pulse_area, real_span_rank, run_strategy, Extremum,
    KickEvent, KickKind, PhysicalPulse, RotorState, Scheme, StrategyConfig, C,
};

fn commutator(a: &DMatrix<C<f64>>, b: &DMatrix<C<f64>>) -> DMatrix<C<f64>> {
    a * b - b * a
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> RotorState {
    let v = DVector::from_fn(dim, |_, _| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    RotorState::normalized(v).unwrap()
}

#[test]
fn kicks_leave_the_observable_unchanged_at_the_kick_instant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in [KickKind::Orientation, KickKind::Alignment] {
        for dim in [2, 5, 12, 40] {
            let psi = random_state(&mut rng, dim);
            let obs = observable::<f64>(kind, dim).unwrap();
            let area = rng.random_range(-4.0..4.0);
            let after = psi.apply(&kick_unitary(&obs, area).unwrap()).unwrap();
            let gap = expectation(&after, &obs).unwrap() - expectation(&psi, &obs).unwrap();
            assert!(gap.abs() < 1e-10, "{kind:?} dim {dim}: {gap}");
        }
    }
}

#[test]
fn s2_ends_closer_to_the_target_than_at_any_kick() {
    let mut config = StrategyConfig::new(KickKind::Orientation);
    config.scheme = Scheme::S2;
    let run = run_strategy(&config, &RotorState::ground(5).unwrap()).unwrap();
    let best_at_kicks = run.projections.iter().cloned().fold(0.0, f64::max);
    assert!(run.final_projection > best_at_kicks);
    assert!(run.final_projection > 0.9);
}

#[test]
fn curvature_factor_is_the_double_commutator_after_the_kick() {
    // ⟨cosθ⟩''(0⁺) = −ε²⟨[J²,[J²,cosθ]]⟩ in the kicked state.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let big = 70;
    let j2 = build_j2::<f64>(big).unwrap().into_matrix();
    let c = build_cos::<f64>(big).unwrap().into_matrix();
    let double = commutator(&j2, &commutator(&j2, &c));
    for area in [0.01, 0.5, 1.0, 2.0] {
        let chi = target_for::<f64>(KickKind::Orientation, 5, Extremum::Maximize).unwrap().state;
        for psi in [chi, random_state(&mut rng, 5)] {
            let wide = embed_or_truncate(&psi, big).unwrap().0;
            let kicked = wide.apply(&kick_unitary(&build_cos::<f64>(big).unwrap(), area).unwrap()).unwrap();
            let a = kicked.amplitudes();
            let direct = a.dotc(&(&double * a)).re;
            let d = DelayMoments::of(&psi, 40).unwrap().curvature_factor(area);
            assert!((direct - d).abs() < 1e-9 * (1.0 + d.abs()), "A = {area}: {direct} vs {d}");
        }
    }
}

#[test]
fn sigma_cos_has_real_expectation_on_real_states() {
    let chi = target_for::<f64>(KickKind::Orientation, 5, Extremum::Maximize).unwrap().state;
    let m = DelayMoments::of(&chi, 40).unwrap();
    assert!(m.im_sigma_cos.abs() < 1e-14);
    assert!((m.cos2 - 0.83742).abs() < 1e-5);
    assert!((m.cos_j2 - 5.68377).abs() < 1e-5);
    assert!((m.cos_minus_cos3 - 0.132594).abs() < 1e-6);
}

#[test]
fn commutator_directions_lie_in_the_closure() {
    for kind in [KickKind::Orientation, KickKind::Alignment] {
        for n in 2..=6 {
            let h0 = build_j2::<f64>(n).unwrap();
            let obs = observable::<f64>(kind, n).unwrap();
            let r = ad_residual_in_closure(&h0, &obs, &obs, 6).unwrap();
            assert!(r < 1e-9, "{kind:?} n = {n}: residual {r}");
        }
    }
}

#[test]
fn arnoldi_dimension_matches_the_raw_commutator_span() {
    for kind in [KickKind::Orientation, KickKind::Alignment] {
        for n in 2..=5 {
            let h0 = build_j2::<f64>(n).unwrap();
            let obs = observable::<f64>(kind, n).unwrap();
            let raw = real_span_rank(&ad_sequence(&h0, &obs, n * n).unwrap()).unwrap();
            assert_eq!(dim_v(&h0, &obs, n).unwrap(), raw, "{kind:?} n = {n}");
        }
    }
}

#[test]
fn lie_dimensions_regression() {
    let orientation = [(2, 4, 2), (3, 9, 4), (4, 16, 8), (5, 25, 12), (6, 36, 18), (7, 49, 24)];
    for (n, l, v) in orientation {
        let r = lie_report(KickKind::Orientation, n).unwrap();
        assert_eq!((r.dim_closure, r.dim_v), (l, v), "orientation n = {n}");
        assert_eq!(r.dim_v, n * n / 2);
        assert!(r.dim_v <= r.max_dim_v && r.max_dim_v == n * (n - 1));
        assert!(r.controllable);
        // The cosθ spectrum is symmetric about zero.
        assert_eq!(r.equally_spaced_spectrum, n >= 3);
    }
    let alignment = [(2, 2, 0), (3, 5, 2), (4, 8, 4), (5, 13, 8), (6, 18, 12), (7, 25, 18)];
    for (n, l, v) in alignment {
        let r = lie_report(KickKind::Alignment, n).unwrap();
        assert_eq!((r.dim_closure, r.dim_v), (l, v), "alignment n = {n}");
        assert!(!r.controllable && r.dim_v <= n * (n - 1));
    }
}

#[test]
fn alignment_closure_splits_by_parity() {
    // cos²θ and J² preserve parity, so the closure is u(even) ⊕ u(odd).
    for n in 2..=8 {
        let h0 = build_j2::<f64>(n).unwrap();
        let h = observable::<f64>(KickKind::Alignment, n).unwrap();
        let (even, odd) = (n.div_ceil(2), n / 2);
        assert_eq!(lie_closure_dim(&h0, &h, n).unwrap(), even * even + odd * odd);
    }
}

#[test]
fn efficiency_and_duration_regression() {
    let orientation = efficiency_duration_scan(KickKind::Orientation, [2, 3, 4, 5, 6, 12]).unwrap();
    let want = [
        (0.577350, 0.166667),
        (0.774597, 0.183677),
        (0.861136, 0.153149),
        (0.906180, 0.128734),
        (0.932470, 0.110434),
        (0.981561, 0.058729),
    ];
    for (p, (e, d)) in orientation.iter().zip(want) {
        assert!((p.efficiency - e).abs() < 1e-6 && (p.duration_fraction - d).abs() < 1e-6, "{p:?}");
    }
    let alignment = efficiency_duration_scan(KickKind::Alignment, [2, 3, 4, 5, 6, 12]).unwrap();
    let want = [
        (0.6, 1.0),
        (0.741556, 0.150748),
        (0.821162, 0.115692),
        (0.869499, 0.095488),
        (0.900806, 0.081698),
        (0.968616, 0.044398),
    ];
    for (p, (e, d)) in alignment.iter().zip(want) {
        assert!((p.efficiency - e).abs() < 1e-6 && (p.duration_fraction - d).abs() < 1e-6, "{p:?}");
    }
    // Legendre zeros: the orientation bound is the largest root of P_N.
    for p in &orientation {
        assert!(p.efficiency < 1.0);
    }
    let longer = efficiency_duration_scan(KickKind::Alignment, 3..=12).unwrap();
    assert!(longer.windows(2).all(|w| w[1].duration_fraction < w[0].duration_fraction));
}

#[test]
fn long_train_stays_away_from_the_basis_edge() {
    let train = fig9_train(TrainConfig::default()).unwrap();
    assert_eq!(train.run.kicks.len(), 30);
    assert!(train.edge_leakage < 1e-20, "{}", train.edge_leakage);
    assert!(train.delays_shrink());
    assert!((train.last_ten_mean - 3.8849e-3).abs() < 5e-7, "{}", train.last_ten_mean);
    let values = &train.run.values;
    assert!(values.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn licl_pulse_gives_unit_area_and_sudden_epsilon() {
    let tau = 0.3 / units::PS_PER_AU_TIME;
    let pulse = PhysicalPulse {
        envelope: vec![1.5e5 / units::V_PER_CM_PER_AU_FIELD; 65],
        duration: tau,
        b_rot: 0.706 * units::HARTREE_PER_INV_CM,
        mu0: 7.12 * units::AU_PER_DEBYE,
        delta_alpha: 0.0,
        alpha_perp: 0.0,
        max_epsilon: 0.1,
    };
    let a = pulse_area(&pulse, KickKind::Orientation).unwrap();
    assert!((a - 1.0).abs() < 0.15, "A = {a}");
    assert!((pulse.epsilon() - 0.04).abs() < 0.004);
}

#[test]
fn kicks_at_the_same_instant_compose() {
    let psi = RotorState::ground(8).unwrap();
    let k = |a| KickEvent::new(1.0, a, KickKind::Orientation).unwrap();
    let two = propagate_state(&psi, &[k(0.4), k(0.6)], 0.03, 0.0, 20.0).unwrap();
    let one = propagate_state(&psi, &[k(1.0)], 0.03, 0.0, 20.0).unwrap();
    assert!((two.amplitudes() - one.amplitudes()).camax() < 1e-13);
}
