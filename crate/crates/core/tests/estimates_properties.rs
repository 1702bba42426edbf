use kamknob::estimates::{
    compute_constants, delta_series_sum, detuning_condition, detuning_partial_sum, domain_product, epsilon_threshold,
    predicted_schedule, ConstantsLedger,
};
use kamknob::fourier_taylor::DomainParams;
use kamknob::homological::DiophantineFrequency;
use proptest::prelude::*;

fn ledger(e0: f64, gamma: f64, tau: f64, rho: f64, sigma: f64) -> ConstantsLedger {
    let freq = DiophantineFrequency::new(vec![1.0, 0.5f64.sqrt()], gamma, tau);
    compute_constants(e0, 2, &freq, &DomainParams::new(rho, sigma).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ledger_chain_identities(
        e0 in 0.1f64..10.0, gamma in 0.01f64..1.0, tau in 0.0f64..3.0, rho in 0.01f64..1.0, sigma in 0.05f64..1.0,
    ) {
        let l = ledger(e0, gamma, tau, rho, sigma);
        let e = std::f64::consts::E;
        let rs = rho * sigma;
        prop_assert!(rel(l.e, 2.0 * e0) <= 1e-14);
        prop_assert!(rel(l.kk(2), 2.0 * l.kk(1) * l.e / (e * rs)) <= 1e-14);
        prop_assert!(rel(l.kk(4), 3.0 * l.kk(3)) <= 1e-14);
        prop_assert!(rel(l.kk(5), l.e + l.kk(2)) <= 1e-14);
        prop_assert!(rel(l.kk(8) / l.kk(5), l.kk(1) / l.e) <= 1e-14);
        prop_assert!(rel(l.kk(11), 2.0 * l.kk(7) / (e * e)) <= 1e-14);
        prop_assert!(l.k.iter().all(|&k| k > 0.0 && k <= l.lambda));
        prop_assert!(l.lambda >= 1.0);
    }

    #[test]
    fn threshold_decreases_with_every_constant(
        e0 in 0.1f64..10.0, alpha in 9.0f64..30.0, tau in 0.0f64..3.0, bump in 1.01f64..4.0,
    ) {
        let base = ledger(e0, 0.3, tau, 0.1, 0.5);
        let eps = epsilon_threshold(&base, alpha, tau);
        prop_assert!(eps > 0.0);
        let mut bigger_lambda = base.clone();
        bigger_lambda.lambda *= bump;
        prop_assert!(epsilon_threshold(&bigger_lambda, alpha, tau) <= eps);
        let mut bigger_k5 = base.clone();
        bigger_k5.k[4] *= bump;
        prop_assert!(epsilon_threshold(&bigger_k5, alpha, tau) <= eps);
        prop_assert!(epsilon_threshold(&base, alpha * bump, tau) < eps);
        prop_assert!(epsilon_threshold(&base, alpha, tau + bump) < eps);
    }

    #[test]
    fn schedule_keeps_half_the_domain(alpha in 9.0f64..100.0, steps in 1usize..12) {
        let l = ledger(1.0, 0.3, 1.0, 0.1, 0.5);
        let dom = DomainParams::new(0.1, 0.5).unwrap();
        let s = predicted_schedule(1e-6, alpha, &dom, steps, &l).unwrap();
        prop_assert!(s.delta.iter().sum::<f64>() <= 1.0 / 8.0 + 1e-16);
        prop_assert!(s.rho.iter().all(|&r| r >= dom.rho / 2.0));
        prop_assert!(s.sigma.iter().all(|&r| r >= dom.sigma / 2.0));
        prop_assert!(s.domain_product >= 0.5);
        prop_assert!(rel(delta_series_sum(alpha), 1.0 / (alpha - 1.0)) <= 1e-14);
        for w in s.eps.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn closed_form_matches_partial_sum(k5 in 0.1f64..100.0, ratio in 1e-6f64..0.3, k in 1usize..8) {
        let c = detuning_condition(k5, ratio, k);
        prop_assert!(rel(c.lhs, detuning_partial_sum(k5, ratio, k, 30)) <= 1e-12);
        prop_assert_eq!(c.holds, c.lhs <= c.rhs);
    }
}

#[test]
fn nine_is_the_boundary_case() {
    assert!(rel(delta_series_sum(9.0), 0.125) <= 1e-15);
    let p = domain_product(9.0);
    assert!(p > 0.5 && (p - 0.5249).abs() < 1e-3, "{p}");
}

#[test]
fn schedule_rejects_small_alpha_and_large_eps() {
    let l = ledger(1.0, 0.3, 1.0, 0.1, 0.5);
    let dom = DomainParams::new(0.1, 0.5).unwrap();
    assert!(predicted_schedule(1e-6, 4.0, &dom, 3, &l).is_err());
    assert!(predicted_schedule(1e-2, 9.0, &dom, 3, &l).is_err());
}
