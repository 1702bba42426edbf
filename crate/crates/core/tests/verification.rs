use kamknob::fourier_taylor::{DomainParams, FourierTaylor, TruncationPolicy};
use kamknob::homological::DiophantineFrequency;
use kamknob::normalizer::{run_normalization, HamiltonianState, NormalFormResult, RunParams};
use kamknob::verification::{
    advance_angle, angle_difference, deformation_check, integrate_orbit, normalized_action_drift, round_trip_error,
    symplecticity_check, torus_residual, wrap_angle, HamiltonianField, IntegratorOptions, Scheme, TorusOptions,
};

fn pendulum(eps: f64) -> (HamiltonianState, NormalFormResult) {
    let h = &FourierTaylor::p_monomial(1, &[2], 0.5) + &FourierTaylor::cos(&[1], eps);
    let state = HamiltonianState::from_series(
        DiophantineFrequency::new(vec![1.0], 0.5, 0.0),
        &h,
        DomainParams::new(0.1, 0.5).unwrap(),
        &TruncationPolicy::default(),
    )
    .unwrap();
    let result = run_normalization(&state, &RunParams::default()).unwrap();
    (state, result)
}

#[test]
fn unperturbed_torus_is_exact() {
    let (state, result) = pendulum(0.0);
    let report = torus_residual(&state, &result, &TorusOptions::default()).unwrap();
    assert_eq!(report.residual_floor, 0.0);
    assert!(report.max_deviation <= 1e-12, "{:e}", report.max_deviation);
    assert!(report.energy_drift <= 1e-14);
}

#[test]
fn perturbed_torus_stays_near_its_image() {
    let (state, result) = pendulum(1e-3);
    let report = torus_residual(&state, &result, &TorusOptions::default()).unwrap();
    assert_eq!(report.samples.len(), 8);
    assert!(report.max_deviation <= 1e-10, "{:e}", report.max_deviation);
    assert!(report.energy_drift <= 1e-10, "{:e}", report.energy_drift);
}

#[test]
fn actions_drift_at_the_residual_rate() {
    let h = &FourierTaylor::p_monomial(1, &[2], 0.5) + &FourierTaylor::cos(&[1], 1e-3);
    let state = HamiltonianState::from_series(
        DiophantineFrequency::new(vec![1.0], 0.5, 0.0),
        &h,
        DomainParams::new(0.1, 0.5).unwrap(),
        &TruncationPolicy::default(),
    )
    .unwrap();
    let params = RunParams {
        steps: 2,
        ..RunParams::default()
    };
    let result = run_normalization(&state, &params).unwrap();
    for q0 in [0.0, 1.0, 2.0] {
        let drift = normalized_action_drift(&result, &[q0], 50.0, &IntegratorOptions::default()).unwrap();
        assert!(drift.residual > 0.0);
        assert!(drift.max_ratio <= 10.0, "{drift:?}");
    }
}

#[test]
fn deformation_shrinks_with_the_perturbation() {
    let mut sizes = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        let (_, result) = pendulum(eps);
        let deltas: Vec<f64> = result.steps.iter().map(|d| d.delta).collect();
        let dom = DomainParams::new(0.1, 0.5).unwrap();
        let report = deformation_check(&result, &dom, &deltas, 0.0, true, 3).unwrap();
        assert_eq!(report.points, 3 * 12);
        sizes.push(report.max_dp_over_rho.max(report.max_dq_over_sigma));
    }
    for w in sizes.windows(2) {
        assert!(w[1] < 0.2 * w[0], "{sizes:?}");
    }
}

#[test]
fn transform_is_canonical() {
    let (_, result) = pendulum(1e-3);
    assert!(symplecticity_check(&result, 20, 1).unwrap() <= 1e-6);
    assert!(round_trip_error(&result, 20, 1).unwrap() <= 1e-10);
}

#[test]
fn both_schemes_conserve_energy() {
    let h = &FourierTaylor::p_monomial(1, &[2], 0.5) + &FourierTaylor::cos(&[1], 0.1);
    let field = HamiltonianField::new(&h, &DomainParams::new(0.1, 0.5).unwrap());
    for scheme in [Scheme::Extrapolation, Scheme::GaussLegendre] {
        let opts = IntegratorOptions {
            scheme,
            ..IntegratorOptions::default()
        };
        let traj = integrate_orbit(&field, &[0.05], &[0.3], 100.0, &opts).unwrap();
        assert!(traj.energy_drift <= 1e-10, "{scheme:?}: {:e}", traj.energy_drift);
        assert_eq!(*traj.times.last().unwrap(), 100.0);
    }
}

#[test]
fn free_rotation_is_reproduced() {
    let omega = 0.5f64.sqrt();
    let field = HamiltonianField::new(&FourierTaylor::linear(&[omega]), &DomainParams::new(0.1, 0.5).unwrap());
    let traj = integrate_orbit(&field, &[0.0], &[1.0], 100.0, &IntegratorOptions::default()).unwrap();
    for (t, q) in traj.times.iter().zip(&traj.q) {
        assert!(angle_difference(q[0], advance_angle(1.0, omega, *t)).abs() <= 1e-12);
    }
}

#[test]
fn angle_helpers() {
    let tau = std::f64::consts::TAU;
    assert_eq!(wrap_angle(0.0), 0.0);
    assert!((wrap_angle(-0.5) - (tau - 0.5)).abs() <= 1e-15);
    assert!(wrap_angle(tau) < 1e-15);
    assert!((angle_difference(0.1, tau - 0.1) - 0.2).abs() <= 1e-15);
    assert!((advance_angle(0.0, 1.0, 10.0) - (10.0 - tau)).abs() <= 1e-14);
}

#[test]
fn bad_options_are_rejected() {
    let field = HamiltonianField::new(&FourierTaylor::linear(&[1.0]), &DomainParams::new(0.1, 0.5).unwrap());
    let opts = IntegratorOptions {
        dt: 0.0,
        ..IntegratorOptions::default()
    };
    assert!(integrate_orbit(&field, &[0.0], &[0.0], 1.0, &opts).is_err());
    assert!(integrate_orbit(&field, &[0.0, 0.0], &[0.0], 1.0, &IntegratorOptions::default()).is_err());
}
