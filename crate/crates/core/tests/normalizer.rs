mod common;

use kamknob::fourier_taylor::{DomainParams, FourierTaylor, TruncationPolicy};
use kamknob::normalizer::{
    normalization_step, run_normalization, transform_point, CanonicalTransform, Direction, GeneratorPair,
    HamiltonianState, NormalFormResult, RunParams,
};
use kamknob::verification::detuned_hamiltonian;
use kamknob::{DiophantineFrequency, NormalizeError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{golden, relative_gap};

fn pendulum_state(eps: f64) -> HamiltonianState {
    let h = &FourierTaylor::p_monomial(1, &[2], 0.5) + &FourierTaylor::cos(&[1], eps);
    HamiltonianState::from_series(
        DiophantineFrequency::new(vec![1.0], 0.5, 0.0),
        &h,
        DomainParams::new(0.1, 0.5).unwrap(),
        &TruncationPolicy::default(),
    )
    .unwrap()
}

fn two_dof_state(eps: f64) -> HamiltonianState {
    let kinetic = &FourierTaylor::p_monomial(2, &[2, 0], 0.5) + &FourierTaylor::p_monomial(2, &[0, 2], 0.5);
    let potential = &FourierTaylor::cos(&[1, 0], eps) + &FourierTaylor::cos(&[1, -1], eps);
    HamiltonianState::from_series(
        DiophantineFrequency::new(vec![1.0, golden()], 0.3, 1.0),
        &(&kinetic + &potential),
        DomainParams::new(0.1, 0.5).unwrap(),
        &TruncationPolicy::default(),
    )
    .unwrap()
}

fn pendulum_run(eps: f64, steps: usize) -> NormalFormResult {
    let params = RunParams {
        steps,
        ..RunParams::default()
    };
    run_normalization(&pendulum_state(eps), &params).unwrap()
}

#[test]
fn unperturbed_step_changes_nothing() {
    let state = pendulum_state(0.0);
    let out = normalization_step(&state, &TruncationPolicy::default(), 1, 1.0 / 9.0).unwrap();
    assert!(out.generators.chi0.is_zero() && out.generators.chi1.is_zero());
    assert_eq!(out.generators.detuning_increment, vec![0.0]);
    assert_eq!(out.state.parts, state.parts);
    assert_eq!(out.state.residual().max(), 0.0);
}

#[test]
fn first_pendulum_step() {
    let eps = 1e-3;
    let out = normalization_step(&pendulum_state(eps), &TruncationPolicy::default(), 1, 1.0 / 9.0).unwrap();
    let g = &out.generators;
    assert!(relative_gap(&g.chi0, &FourierTaylor::sin(&[1], eps)) <= 1e-15);
    assert_eq!(g.detuning_increment, vec![0.0]);
    // L_χ0 (p²/2) = −ε p cos q, so χ1 solves for −ε p cos q.
    assert!(relative_gap(&g.chi1, &FourierTaylor::p_sin(&[1], &[1], -eps)) <= 1e-12);
    let r = out.state.residual();
    assert!(r.norm_h0 <= 1.0 * eps * eps, "{r:?}");
    assert!(r.norm_h0 > 0.0);
}

#[test]
fn action_linear_perturbation_only_needs_chi1() {
    let a = 0.01;
    let state = HamiltonianState::from_series(
        DiophantineFrequency::new(vec![1.0], 0.5, 0.0),
        &FourierTaylor::p_cos(&[1], &[1], a),
        DomainParams::new(0.1, 0.5).unwrap(),
        &TruncationPolicy::default(),
    )
    .unwrap();
    let out = normalization_step(&state, &TruncationPolicy::default(), 1, 1.0 / 9.0).unwrap();
    assert!(out.generators.chi0.is_zero());
    assert_eq!(out.generators.detuning_increment, vec![0.0]);
    assert!(relative_gap(&out.generators.chi1, &FourierTaylor::p_sin(&[1], &[1], a)) <= 1e-15);
}

#[test]
fn unperturbed_run_is_trivial() {
    let r = pendulum_run(0.0, 6);
    assert_eq!(r.detuning0, vec![0.0]);
    assert_eq!(r.omega0, r.omega);
    assert!(r.generators.iter().all(|g| g.chi0.is_zero() && g.chi1.is_zero()));
    assert_eq!(r.final_residual().max(), 0.0);
}

#[test]
fn pendulum_detuning_matches_second_order_theory() {
    let eps = 1e-3;
    let r = pendulum_run(eps, 5);
    // Averaging ⟨L_χ0 h_2⟩ to second order gives δω = ε²/(2ω²).
    assert!(
        (r.detuning0[0] - eps * eps / 2.0).abs() <= eps.powi(3),
        "{:?}",
        r.detuning0
    );
    assert_eq!(r.omega0[0], r.omega[0] + r.detuning0[0]);
}

#[test]
fn increments_shrink_with_more_steps() {
    let eps = 1e-3;
    for steps in 1..=3 {
        let r = pendulum_run(eps, steps);
        let norms: Vec<f64> = r.steps.iter().map(|d| d.detuning_increment_norm).collect();
        for w in norms.windows(2).skip(1) {
            assert!(w[1] < w[0], "{norms:?}");
        }
    }
}

#[test]
fn residuals_contract_until_the_floor() {
    let r = pendulum_run(1e-3, 5);
    let seq = r.residual_sequence();
    let floor = 10.0 * r.accumulated_loss;
    for w in seq.windows(2) {
        if w[0] > floor {
            assert!(w[1] < w[0], "{seq:?}");
        }
    }
}

#[test]
fn tails_follow_the_increments() {
    let r = run_normalization(&two_dof_state(1e-3), &RunParams::default()).unwrap();
    assert!(r.outer_converged);
    for k in 1..r.tails.len() {
        let c = &r.generators[k - 1].detuning_increment;
        for (j, cj) in c.iter().enumerate() {
            let lhs = r.tails[k - 1][j] - r.tails[k][j];
            let scale = r.tails[k - 1][j].abs().max(r.tails[k][j].abs());
            assert!((lhs + cj).abs() <= 4.0 * f64::EPSILON * scale, "k = {k}, j = {j}");
        }
    }
    assert_eq!(r.final_state.freq.omega, vec![1.0, golden()]);
    let d0 = r.detuning0.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    assert!(d0 > 0.0 && d0 <= 100.0 * 1e-6);
}

#[test]
fn result_round_trips_through_json() {
    let r = pendulum_run(1e-3, 4);
    let text = kamknob::output::to_json_string(&r).unwrap();
    let back: NormalFormResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn transform_of_single_angle_generator() {
    assert_eq!(
        transform_point(&[], &[0.3], &[1.0], Direction::Forward).unwrap(),
        (vec![0.3], vec![1.0])
    );
    let eps = 0.01;
    let gens = vec![GeneratorPair {
        chi0: FourierTaylor::sin(&[1], eps),
        chi1: FourierTaylor::zero(1),
        detuning_increment: vec![0.0],
    }];
    for q in [0.0, 0.7, 2.5] {
        let (p, q2) = transform_point(&gens, &[0.02], &[q], Direction::Forward).unwrap();
        assert!((p[0] - (0.02 - eps * q.cos())).abs() <= 1e-16);
        assert!((q2[0] - q).abs() <= 1e-16);
    }
}

#[test]
fn inverse_undoes_forward() {
    let r = pendulum_run(1e-3, 5);
    let t = CanonicalTransform::new(&r.generators, &TruncationPolicy::default(), Some(&r.domains)).unwrap();
    let rho = r.final_state.dom.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let p = [rng.gen_range(-rho..rho)];
        let q = [rng.gen_range(0.0..std::f64::consts::TAU)];
        let (pi, qi) = t.apply(&p, &q, Direction::Inverse).unwrap();
        let (pf, qf) = t.apply(&pi, &qi, Direction::Forward).unwrap();
        assert!((pf[0] - p[0]).abs() <= 1e-10 && (qf[0] - q[0]).abs() <= 1e-10);
    }
    let far = t.apply(&[10.0 * rho], &[0.0], Direction::Forward);
    assert!(matches!(far, Err(NormalizeError::OutOfDomain { .. })));
}

/// The normal form and the detuned original agree along the transform, up
/// to the additive constants the steps discard.
#[test]
fn energy_is_conserved_by_the_transform() {
    let state = pendulum_state(1e-3);
    let r = run_normalization(&state, &RunParams::default()).unwrap();
    let original = detuned_hamiltonian(&state, &r);
    let normal = r.final_state.hamiltonian();
    let t = CanonicalTransform::new(&r.generators, &TruncationPolicy::default(), Some(&r.domains)).unwrap();
    let rho = r.final_state.dom.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut gaps = Vec::new();
    for _ in 0..100 {
        let p = [rng.gen_range(-rho..rho)];
        let q = [rng.gen_range(0.0..std::f64::consts::TAU)];
        let (po, qo) = t.apply(&p, &q, Direction::Forward).unwrap();
        gaps.push(original.evaluate(&po, &qo).unwrap() - normal.evaluate(&p, &q).unwrap());
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let spread = gaps.iter().map(|g| (g - mean).abs()).fold(0.0, f64::max);
    let budget = 10.0 * (r.accumulated_loss + r.final_residual().max());
    assert!(spread <= budget.max(1e-15), "spread {spread:e} budget {budget:e}");
}

#[test]
fn invalid_parameters_are_rejected() {
    let bad = RunParams {
        alpha: 3.0,
        ..RunParams::default()
    };
    assert!(matches!(
        run_normalization(&pendulum_state(1e-3), &bad),
        Err(NormalizeError::InvalidParams(_))
    ));
}

fn capped(p_degree: u32, fourier_order: u32, lie_order: usize) -> RunParams {
    RunParams {
        policy: TruncationPolicy {
            p_degree,
            fourier_order,
            lie_order,
            ..TruncationPolicy::default()
        },
        ..RunParams::default()
    }
}

#[test]
fn coarse_fourier_cap_overflows() {
    let out = run_normalization(&two_dof_state(0.05), &capped(8, 2, 40));
    assert!(
        matches!(out, Err(NormalizeError::TruncationOverflow { step: 1, .. })),
        "{out:?}"
    );
}

#[test]
fn short_lie_series_diverges() {
    let out = run_normalization(&two_dof_state(0.05), &capped(3, 64, 2));
    assert!(matches!(out, Err(NormalizeError::LieDivergence { step: 1 })), "{out:?}");
}
