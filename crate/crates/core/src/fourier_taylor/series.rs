use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index::{MultiIndex, Powers, Wave};
use crate::error::SeriesError;
use crate::tolerances::IMAGINARY_RESIDUE;

/// Analyticity domain: action radius `rho` and angle strip width `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub rho: f64,
    pub sigma: f64,
}

impl DomainParams {
    pub fn new(rho: f64, sigma: f64) -> Result<Self, SeriesError> {
        if !(rho > 0.0 && rho.is_finite()) || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(SeriesError::InvalidDomain { rho, sigma });
        }
        Ok(Self { rho, sigma })
    }

    /// The domain `D_{fraction}` in the usual shorthand: both radii scaled.
    pub fn scaled(&self, fraction: f64) -> Self {
        Self {
            rho: self.rho * fraction,
            sigma: self.sigma * fraction,
        }
    }

    /// Weight `ρ^{|m|} e^{|k|σ}` of a monomial in the weighted Fourier norm.
    pub fn weight(&self, idx: &MultiIndex) -> f64 {
        self.rho.powi(idx.degree() as i32) * (f64::from(idx.order()) * self.sigma).exp()
    }
}

/// Sparse Fourier–Taylor series `Σ c_{m,k} p^m e^{i k·q}` in `n` degrees of
/// freedom.
///
/// Both members of every `±k` pair are stored and kept exactly conjugate, so
/// the represented function is real on real `(p, q)`. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTaylor {
    n: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl FourierTaylor {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        let mut out = Self::zero(n);
        out.insert(MultiIndex::zero(n), Complex64::new(value, 0.0));
        out
    }

    /// Builds a series from raw terms. Duplicate indices are summed, zeros
    /// dropped, and the result must be Hermitian to within rounding.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut map: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (idx, c) in terms {
            if idx.dim() != n {
                return Err(SeriesError::DimensionMismatch {
                    left: n,
                    right: idx.dim(),
                });
            }
            *map.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        let out = Self { n, terms: map };
        let scale = out.coefficient_sum().max(1.0);
        if let Some((idx, defect)) = out.worst_hermitian_defect() {
            if defect > IMAGINARY_RESIDUE * scale {
                return Err(SeriesError::NotHermitian {
                    index: idx.to_string(),
                    defect,
                });
            }
        }
        let mut out = out;
        out.hermitize();
        Ok(out)
    }

    pub(crate) fn from_map_unchecked(n: usize, terms: BTreeMap<MultiIndex, Complex64>) -> Self {
        Self { n, terms }
    }

    /// `amp · p^m`.
    pub fn p_monomial(n: usize, m: &[u16], amp: f64) -> Self {
        let mut out = Self::zero(n);
        out.insert(MultiIndex::new(m, &vec![0; n]), Complex64::new(amp, 0.0));
        out
    }

    /// `Σ_j v_j p_j`.
    pub fn linear(v: &[f64]) -> Self {
        let n = v.len();
        let mut out = Self::zero(n);
        for (j, &vj) in v.iter().enumerate() {
            let mut m = vec![0u16; n];
            m[j] = 1;
            out.insert(MultiIndex::new(&m, &vec![0; n]), Complex64::new(vj, 0.0));
        }
        out
    }

    /// `amp · p^m cos(k·q)`.
    pub fn p_cos(m: &[u16], k: &[i32], amp: f64) -> Self {
        Self::harmonic(m, k, Complex64::new(amp / 2.0, 0.0))
    }

    /// `amp · p^m sin(k·q)`.
    pub fn p_sin(m: &[u16], k: &[i32], amp: f64) -> Self {
        Self::harmonic(m, k, Complex64::new(0.0, -amp / 2.0))
    }

    /// `amp · cos(k·q)`.
    pub fn cos(k: &[i32], amp: f64) -> Self {
        Self::p_cos(&vec![0; k.len()], k, amp)
    }

    /// `amp · sin(k·q)`.
    pub fn sin(k: &[i32], amp: f64) -> Self {
        Self::p_sin(&vec![0; k.len()], k, amp)
    }

    /// `c p^m e^{ik·q} + conj(c) p^m e^{-ik·q}`.
    fn harmonic(m: &[u16], k: &[i32], c: Complex64) -> Self {
        let n = k.len();
        let idx = MultiIndex::new(m, k);
        let mut out = Self::zero(n);
        if idx.is_average() {
            out.insert(idx, Complex64::new(2.0 * c.re, 0.0));
        } else {
            let conj = idx.conjugate();
            out.insert(idx, c);
            out.insert(conj, c.conj());
        }
        out
    }

    fn insert(&mut self, idx: MultiIndex, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            self.terms.insert(idx, c);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Complex64 {
        self.terms.get(idx).copied().unwrap_or_default()
    }

    pub fn coeff_at(&self, m: &[u16], k: &[i32]) -> Complex64 {
        self.coeff(&MultiIndex::new(m, k))
    }

    /// Largest action degree present (0 for the zero series).
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Largest Fourier order present (0 for the zero series).
    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    /// `Σ |c_{m,k}|`, the unweighted coefficient sum.
    pub fn coefficient_sum(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, |a, b| a + b)
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<(), SeriesError> {
        if self.n != other.n {
            return Err(SeriesError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self::zero(self.n);
        }
        let terms = self.terms.iter().map(|(i, c)| (i.clone(), c * factor)).collect();
        Self { n: self.n, terms }
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out.add_scaled_assign(other, factor)?;
        Ok(out)
    }

    pub fn add_scaled_assign(&mut self, other: &Self, factor: f64) -> Result<(), SeriesError> {
        self.check_dim(other)?;
        if factor == 0.0 {
            return Ok(());
        }
        for (idx, c) in &other.terms {
            let entry = self.terms.entry(idx.clone()).or_default();
            *entry += c * factor;
        }
        self.terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(())
    }

    /// The `|m| = l` part. `l = -1` (the class `P_{-1}`) gives zero.
    pub fn grade_project(&self, l: i32) -> Self {
        if l < 0 {
            return Self::zero(self.n);
        }
        self.filter(|idx| idx.degree() == l as u32)
    }

    /// The `k = 0` part: average over the angles.
    pub fn angle_average(&self) -> Self {
        self.filter(MultiIndex::is_average)
    }

    /// `f − ⟨f⟩_q`.
    pub fn off_average(&self) -> Self {
        self.filter(|idx| !idx.is_average())
    }

    /// Removes the `m = 0, k = 0` constant.
    pub fn without_constant(&self) -> Self {
        self.filter(|idx| !(idx.is_average() && idx.degree() == 0))
    }

    pub fn filter<F: Fn(&MultiIndex) -> bool>(&self, keep: F) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(i, _)| keep(i))
            .map(|(i, c)| (i.clone(), *c))
            .collect();
        Self { n: self.n, terms }
    }

    /// Gradient of a grade-1 average `Σ_j v_j p_j`: returns `v`, ignoring
    /// every other term.
    pub fn linear_average_coefficients(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        for (idx, c) in &self.terms {
            if idx.is_average() && idx.degree() == 1 {
                let j = idx.m.iter().position(|&e| e == 1).expect("degree one");
                v[j] += c.re;
            }
        }
        v
    }

    /// `∂f/∂p_j`, an exact index shift.
    pub fn derivative_p(&self, j: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (idx, c) in &self.terms {
            let e = idx.m[j];
            if e == 0 {
                continue;
            }
            let mut m: Powers = idx.m.clone();
            m[j] -= 1;
            terms.insert(MultiIndex { m, k: idx.k.clone() }, c * f64::from(e));
        }
        Self { n: self.n, terms }
    }

    /// `∂f/∂q_j`: multiplies each coefficient by `i k_j`.
    pub fn derivative_q(&self, j: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (idx, c) in &self.terms {
            let kj = idx.k[j];
            if kj == 0 {
                continue;
            }
            terms.insert(idx.clone(), c * Complex64::new(0.0, f64::from(kj)));
        }
        Self { n: self.n, terms }
    }

    /// Weighted Fourier norm `Σ_k |f_k|_ρ e^{|k|σ}` with
    /// `|f_k|_ρ ≤ Σ_m |c_{m,k}| ρ^{|m|}`.
    pub fn weighted_norm(&self, dom: &DomainParams) -> f64 {
        self.terms
            .iter()
            .map(|(idx, c)| c.norm() * dom.weight(idx))
            .fold(0.0, |a, b| a + b)
    }

    /// Complex value `Σ c p^m e^{ik·q}` at a real point.
    pub fn evaluate_complex(&self, p: &[f64], q: &[f64]) -> Complex64 {
        debug_assert_eq!(p.len(), self.n);
        debug_assert_eq!(q.len(), self.n);
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, c) in &self.terms {
            acc += c * monomial_value(idx, p, q);
        }
        acc
    }

    /// Real value at `(p, q)`; an imaginary residue above tolerance means the
    /// series lost its conjugate symmetry.
    pub fn evaluate(&self, p: &[f64], q: &[f64]) -> Result<f64, SeriesError> {
        if p.len() != self.n || q.len() != self.n {
            return Err(SeriesError::DimensionMismatch {
                left: self.n,
                right: p.len().max(q.len()),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (idx, c) in &self.terms {
            let t = c * monomial_value(idx, p, q);
            scale += t.norm();
            acc += t;
        }
        if acc.im.abs() > IMAGINARY_RESIDUE * scale.max(1.0) {
            return Err(SeriesError::ImaginaryResidue { residue: acc.im });
        }
        Ok(acc.re)
    }

    /// Largest `|c_{m,k} − conj(c_{m,−k})|` and where it occurs.
    pub fn worst_hermitian_defect(&self) -> Option<(MultiIndex, f64)> {
        let mut worst: Option<(MultiIndex, f64)> = None;
        for (idx, c) in &self.terms {
            let partner = self.coeff(&idx.conjugate());
            let defect = (c - partner.conj()).norm();
            if worst.as_ref().is_none_or(|(_, w)| defect > *w) {
                worst = Some((idx.clone(), defect));
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.worst_hermitian_defect().is_none_or(|(_, d)| d <= tol)
    }

    /// Projects onto exactly conjugate-symmetric coefficients by averaging
    /// each `±k` pair; `k = 0` coefficients become real.
    pub fn hermitize(&mut self) {
        let keys: Vec<MultiIndex> = self
            .terms
            .keys()
            .filter(|i| i.is_positive_wave() || i.is_average())
            .cloned()
            .collect();
        let zero = Complex64::new(0.0, 0.0);
        // Negative-wave terms without a positive partner.
        let orphans: Vec<MultiIndex> = self
            .terms
            .keys()
            .filter(|i| !i.is_positive_wave() && !i.is_average())
            .filter(|i| !self.terms.contains_key(&i.conjugate()))
            .cloned()
            .collect();
        for idx in keys.into_iter().chain(orphans.into_iter().map(|i| i.conjugate())) {
            if idx.is_average() {
                if let Some(c) = self.terms.get_mut(&idx) {
                    c.im = 0.0;
                }
                continue;
            }
            let conj = idx.conjugate();
            let a = self.terms.get(&idx).copied().unwrap_or(zero);
            let b = self.terms.get(&conj).copied().unwrap_or(zero);
            let avg = (a + b.conj()) * 0.5;
            if avg == zero {
                self.terms.remove(&idx);
                self.terms.remove(&conj);
            } else {
                self.terms.insert(idx, avg);
                self.terms.insert(conj, avg.conj());
            }
        }
        self.terms.retain(|_, c| *c != zero);
    }

    /// Drops terms beyond the given caps; returns the dropped part.
    pub fn split_caps(&self, p_degree: u32, fourier_order: u32) -> (Self, Self) {
        let keep = |i: &MultiIndex| i.degree() <= p_degree && i.order() <= fourier_order;
        (self.filter(keep), self.filter(|i| !keep(i)))
    }
}

pub(crate) fn monomial_value(idx: &MultiIndex, p: &[f64], q: &[f64]) -> Complex64 {
    let mut pm = 1.0;
    let mut phase = 0.0;
    for j in 0..idx.dim() {
        let e = idx.m[j];
        if e != 0 {
            pm *= p[j].powi(i32::from(e));
        }
        let kj = idx.k[j];
        if kj != 0 {
            phase += f64::from(kj) * q[j];
        }
    }
    Complex64::from_polar(pm, phase)
}

impl Add for &FourierTaylor {
    type Output = FourierTaylor;

    fn add(self, rhs: &FourierTaylor) -> FourierTaylor {
        self.add_scaled(rhs, 1.0).expect("series dimensions must agree")
    }
}

impl Sub for &FourierTaylor {
    type Output = FourierTaylor;

    fn sub(self, rhs: &FourierTaylor) -> FourierTaylor {
        self.add_scaled(rhs, -1.0).expect("series dimensions must agree")
    }
}

impl Neg for &FourierTaylor {
    type Output = FourierTaylor;

    fn neg(self) -> FourierTaylor {
        self.scale(-1.0)
    }
}

/// Helper for building indices from plain slices in tests and presets.
pub fn index(m: &[u16], k: &[i32]) -> MultiIndex {
    MultiIndex {
        m: Powers::from_slice(m),
        k: Wave::from_slice(k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pendulum_like(eps: f64) -> FourierTaylor {
        let mut f = FourierTaylor::linear(&[1.0]);
        f.add_scaled_assign(&FourierTaylor::p_monomial(1, &[2], 0.5), 1.0)
            .unwrap();
        f.add_scaled_assign(&FourierTaylor::cos(&[1], eps), 1.0).unwrap();
        f
    }

    #[test]
    fn grade_projection_examples() {
        let f = pendulum_like(1e-3);
        assert_eq!(f.grade_project(0), FourierTaylor::cos(&[1], 1e-3));
        assert_eq!(f.grade_project(2), FourierTaylor::p_monomial(1, &[2], 0.5));
        assert!(f.grade_project(-1).is_zero());
        let mut sum = FourierTaylor::zero(1);
        for l in -1..=f.max_degree() as i32 {
            sum = &sum + &f.grade_project(l);
        }
        assert_eq!(sum, f);
    }

    #[test]
    fn angle_average_examples() {
        assert!(FourierTaylor::cos(&[1], 1.0).angle_average().is_zero());
        let mut f = FourierTaylor::p_monomial(1, &[2], 1.0);
        f.add_scaled_assign(&FourierTaylor::p_cos(&[1], &[1], 1.0), 1.0)
            .unwrap();
        assert_eq!(f.angle_average(), FourierTaylor::p_monomial(1, &[2], 1.0));
        assert_eq!(f.angle_average().angle_average(), f.angle_average());
    }

    #[test]
    fn weighted_norm_examples() {
        // 2 p e^{3iq} together with its conjugate partner.
        let f = FourierTaylor::from_terms(
            1,
            [
                (index(&[1], &[3]), Complex64::new(2.0, 0.0)),
                (index(&[1], &[-3]), Complex64::new(2.0, 0.0)),
            ],
        )
        .unwrap();
        let dom = DomainParams::new(0.5, 0.1).unwrap();
        let single = 2.0 * 0.5 * (0.3f64).exp();
        assert!((single - 1.349_858_807_576_003).abs() < 1e-12);
        assert!((f.weighted_norm(&dom) - 2.0 * single).abs() < 1e-12);
        assert_eq!(FourierTaylor::zero(2).weighted_norm(&dom), 0.0);
        assert_eq!(FourierTaylor::constant(2, -3.5).weighted_norm(&dom), 3.5);
    }

    #[test]
    fn evaluate_examples() {
        let c = FourierTaylor::cos(&[1], 1.0);
        assert!((c.evaluate(&[0.0], &[0.0]).unwrap() - 1.0).abs() < 1e-15);
        let p2 = FourierTaylor::p_monomial(1, &[2], 1.0);
        assert!((p2.evaluate(&[3.0], &[0.7]).unwrap() - 9.0).abs() < 1e-12);
        let pc = FourierTaylor::p_cos(&[1], &[1], 1.0);
        assert!((pc.evaluate(&[2.0], &[PI / 3.0]).unwrap() - 1.0).abs() < 1e-12);
        let s = FourierTaylor::sin(&[1], 2.0);
        assert!((s.evaluate(&[0.0], &[PI / 6.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn imaginary_residue_is_reported() {
        let broken =
            FourierTaylor::from_map_unchecked(1, [(index(&[0], &[1]), Complex64::new(1.0, 0.0))].into_iter().collect());
        assert!(matches!(
            broken.evaluate(&[0.0], &[1.0]),
            Err(SeriesError::ImaginaryResidue { .. })
        ));
    }

    #[test]
    fn from_terms_rejects_missing_partner() {
        let err = FourierTaylor::from_terms(1, [(index(&[0], &[2]), Complex64::new(1.0, 0.0))]);
        assert!(matches!(err, Err(SeriesError::NotHermitian { .. })));
        let err = FourierTaylor::from_terms(2, [(index(&[0], &[2]), Complex64::new(1.0, 0.0))]);
        assert!(matches!(err, Err(SeriesError::DimensionMismatch { .. })));
    }

    #[test]
    fn derivatives_are_index_shifts() {
        let f = FourierTaylor::p_cos(&[2], &[3], 1.0);
        let dp = f.derivative_p(0);
        assert_eq!(dp, FourierTaylor::p_cos(&[1], &[3], 2.0));
        let dq = f.derivative_q(0);
        let expected = FourierTaylor::p_sin(&[2], &[3], -3.0);
        assert!((&dq - &expected).weighted_norm(&DomainParams::new(1.0, 1.0).unwrap()) < 1e-15);
    }

    #[test]
    fn hermitize_averages_pairs() {
        let mut f = FourierTaylor::from_map_unchecked(
            1,
            [
                (index(&[0], &[1]), Complex64::new(1.0, 1.0)),
                (index(&[0], &[-1]), Complex64::new(1.0 + 2e-16, -1.0)),
                (index(&[1], &[0]), Complex64::new(2.0, 1e-17)),
            ]
            .into_iter()
            .collect(),
        );
        f.hermitize();
        assert!(f.is_hermitian(0.0));
        assert_eq!(f.coeff_at(&[1], &[0]).im, 0.0);
    }

    #[test]
    fn linear_average_coefficients_extracts_gradient() {
        let mut f = FourierTaylor::linear(&[0.25, -1.5]);
        f.add_scaled_assign(&FourierTaylor::p_cos(&[1, 0], &[1, 1], 3.0), 1.0)
            .unwrap();
        assert_eq!(f.linear_average_coefficients(), vec![0.25, -1.5]);
    }
}
