mod common;

use kamknob::fourier_taylor::{lie_derivative, multiply, poisson_bracket, DomainParams, FourierTaylor};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{norm_at, random_series, relative_gap, uncapped};

fn dom() -> DomainParams {
    DomainParams::new(0.4, 0.3).unwrap()
}

fn draw(seed: u64, n: usize, terms: usize) -> (FourierTaylor, FourierTaylor, FourierTaylor) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        random_series(&mut rng, n, terms, 3, 4),
        random_series(&mut rng, n, terms, 3, 4),
        random_series(&mut rng, n, terms, 3, 4),
    )
}

fn bracket(f: &FourierTaylor, g: &FourierTaylor) -> FourierTaylor {
    poisson_bracket(f, g, &uncapped(dom())).unwrap().series
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>(), n in 1usize..=3, terms in 1usize..6) {
        let (f, g, _) = draw(seed, n, terms);
        let fg = bracket(&f, &g);
        let gf = bracket(&g, &f);
        prop_assert!(relative_gap(&fg, &-&gf) <= 1e-12);
        let ff = norm_at(&bracket(&f, &f), &dom(), 1.0);
        prop_assert!(ff <= 1e-12 * norm_at(&f, &dom(), 1.0).powi(2).max(1.0));
    }

    #[test]
    fn bracket_is_bilinear(seed in any::<u64>(), n in 1usize..=3, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (f, g, h) = draw(seed, n, 4);
        let combo = &f.scale(a) + &g.scale(b);
        let lhs = bracket(&combo, &h);
        let rhs = &bracket(&f, &h).scale(a) + &bracket(&g, &h).scale(b);
        prop_assert!(relative_gap(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn jacobi_identity(seed in any::<u64>(), n in 1usize..=3) {
        let (f, g, h) = draw(seed, n, 3);
        let a = bracket(&f, &bracket(&g, &h));
        let b = bracket(&g, &bracket(&h, &f));
        let c = bracket(&h, &bracket(&f, &g));
        let scale = norm_at(&a, &dom(), 1.0).max(norm_at(&b, &dom(), 1.0)).max(norm_at(&c, &dom(), 1.0)).max(1.0);
        let sum = &(&a + &b) + &c;
        prop_assert!(norm_at(&sum, &dom(), 1.0) <= 1e-10 * scale);
    }

    #[test]
    fn bracket_respects_grading(seed in any::<u64>(), n in 1usize..=3, l in 0i32..=3, m in 0i32..=3) {
        let (f, g, _) = draw(seed, n, 5);
        let fl = f.grade_project(l);
        let gm = g.grade_project(m);
        let out = bracket(&fl, &gm);
        prop_assert!(out.iter().all(|(idx, _)| idx.degree() as i32 == l + m - 1));
        if l + m == 0 {
            prop_assert!(out.is_zero());
        }
    }

    #[test]
    fn projections_partition_the_series(seed in any::<u64>(), n in 1usize..=3) {
        let (f, _, _) = draw(seed, n, 6);
        let avg = f.angle_average();
        prop_assert_eq!(avg.angle_average(), avg.clone());
        prop_assert_eq!(&avg + &f.off_average(), f.clone());
        let mut total = FourierTaylor::zero(n);
        for l in -1..=(f.max_degree() as i32) {
            total = &total + &f.grade_project(l);
        }
        prop_assert_eq!(total, f.clone());
        prop_assert!(f.grade_project(-1).is_zero());
    }

    #[test]
    fn lie_derivative_obeys_leibniz(seed in any::<u64>(), n in 1usize..=2) {
        let (chi, f, g) = draw(seed, n, 3);
        let tr = uncapped(dom());
        let fg = multiply(&f, &g, &tr).unwrap().series;
        let lhs = lie_derivative(&chi, &fg, &tr).unwrap().series;
        let lf = lie_derivative(&chi, &f, &tr).unwrap().series;
        let lg = lie_derivative(&chi, &g, &tr).unwrap().series;
        let rhs = &multiply(&lf, &g, &tr).unwrap().series + &multiply(&f, &lg, &tr).unwrap().series;
        prop_assert!(relative_gap(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn operations_keep_conjugate_symmetry(seed in any::<u64>(), n in 1usize..=3) {
        let (f, g, _) = draw(seed, n, 5);
        let tr = uncapped(dom());
        let outputs = [
            multiply(&f, &g, &tr).unwrap().series,
            bracket(&f, &g),
            f.derivative_p(0),
            f.derivative_q(n - 1),
            f.angle_average(),
            &f - &g,
        ];
        for out in &outputs {
            prop_assert!(out.is_hermitian(0.0));
        }
    }

    #[test]
    fn norm_is_monotone_and_subadditive(seed in any::<u64>(), n in 1usize..=3, shrink in 0.1f64..1.0) {
        let (f, g, _) = draw(seed, n, 5);
        let d = dom();
        let smaller = DomainParams::new(d.rho * shrink, d.sigma * shrink).unwrap();
        prop_assert!(f.weighted_norm(&smaller) <= f.weighted_norm(&d));
        prop_assert!((&f + &g).weighted_norm(&d) <= (f.weighted_norm(&d) + g.weighted_norm(&d)) * (1.0 + 1e-15));
        prop_assert!((f.weighted_norm(&d) - norm_at(&f, &d, 1.0)).abs() <= 1e-13 * norm_at(&f, &d, 1.0).max(1.0));
    }
}

#[test]
fn bracket_with_the_action() {
    let p = FourierTaylor::p_monomial(1, &[1], 1.0);
    // {f(q), p} = f'(q).
    let e = FourierTaylor::cos(&[1], 2.0);
    let out = bracket(&e, &p);
    let want = FourierTaylor::sin(&[1], -2.0);
    assert!(relative_gap(&out, &want) <= 1e-15);
}
