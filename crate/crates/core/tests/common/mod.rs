#![allow(dead_code)]

use kamknob::fourier_taylor::{DomainParams, FourierTaylor, MultiIndex, Truncation, TruncationPolicy};
use num_complex::Complex64;
use rand::Rng;

/// Caps large enough that no test series is ever truncated.
pub fn uncapped(dom: DomainParams) -> Truncation {
    Truncation::new(
        TruncationPolicy {
            p_degree: 64,
            fourier_order: 512,
            lie_order: 40,
            tail_tol: 0.0,
            coeff_floor: 0.0,
        },
        dom,
    )
}

pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Real root of `x³ = x + 1`.
pub fn plastic() -> f64 {
    let mut x: f64 = 1.3;
    for _ in 0..60 {
        x -= (x * x * x - x - 1.0) / (3.0 * x * x - 1.0);
    }
    x
}

pub fn random_powers<R: Rng>(rng: &mut R, n: usize, max_degree: u32) -> Vec<u16> {
    let total = rng.gen_range(0..=max_degree);
    let mut m = vec![0u16; n];
    for _ in 0..total {
        m[rng.gen_range(0..n)] += 1;
    }
    m
}

pub fn random_wave<R: Rng>(rng: &mut R, n: usize, max_order: u32) -> Vec<i32> {
    let total = rng.gen_range(0..=max_order);
    let mut k = vec![0i32; n];
    for _ in 0..total {
        let j = rng.gen_range(0..n);
        k[j] += if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    k
}

/// Real series with `terms` random harmonics (each with its conjugate).
pub fn random_series<R: Rng>(rng: &mut R, n: usize, terms: usize, max_degree: u32, max_order: u32) -> FourierTaylor {
    let mut raw = Vec::new();
    for _ in 0..terms {
        let m = random_powers(rng, n, max_degree);
        let k = random_wave(rng, n, max_order);
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if k.iter().all(|&v| v == 0) {
            raw.push((MultiIndex::new(&m, &k), Complex64::new(c.re, 0.0)));
        } else {
            let minus: Vec<i32> = k.iter().map(|v| -v).collect();
            raw.push((MultiIndex::new(&m, &k), c));
            raw.push((MultiIndex::new(&m, &minus), c.conj()));
        }
    }
    FourierTaylor::from_terms(n, raw).expect("conjugate pairs are built explicitly")
}

/// Same with zero angle average.
pub fn random_zero_average<R: Rng>(
    rng: &mut R,
    n: usize,
    terms: usize,
    max_degree: u32,
    max_order: u32,
) -> FourierTaylor {
    let s = random_series(rng, n, terms, max_degree, max_order.max(1));
    s.off_average()
}

/// `Σ |c| (aρ)^{|m|} e^{a|k|σ}` written out independently of the library.
pub fn norm_at(f: &FourierTaylor, dom: &DomainParams, a: f64) -> f64 {
    f.iter()
        .map(|(idx, c)| {
            c.norm() * (a * dom.rho).powi(idx.degree() as i32) * (a * f64::from(idx.order()) * dom.sigma).exp()
        })
        .fold(0.0, |s, v| s + v)
}

/// Largest coefficient difference relative to the largest coefficient.
pub fn relative_gap(a: &FourierTaylor, b: &FourierTaylor) -> f64 {
    let diff = a - b;
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    diff.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max) / scale
}
