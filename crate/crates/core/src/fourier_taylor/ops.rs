use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::BuildHasherDefault;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index::{MultiIndex, Powers, Wave};
use super::series::{DomainParams, FourierTaylor};
use crate::error::SeriesError;

/// Global caps applied to every product, bracket and Lie series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationPolicy {
    /// Maximum action degree `L_max`.
    pub p_degree: u32,
    /// Maximum Fourier order `K_F`.
    pub fourier_order: u32,
    /// Lie-series order cap `s_max`.
    pub lie_order: usize,
    /// Lie series stop once a term's norm drops below `tail_tol · ‖f‖`.
    pub tail_tol: f64,
    /// Coefficients whose weighted size `|c| ρ^{|m|} e^{|k|σ}` falls below
    /// this are dropped and counted as loss.
    pub coeff_floor: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            p_degree: 4,
            fourier_order: 32,
            lie_order: 12,
            tail_tol: 1e-16,
            coeff_floor: 1e-24,
        }
    }
}

/// Caps together with the domain where dropped terms are measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub policy: TruncationPolicy,
    pub dom: DomainParams,
}

impl Truncation {
    pub fn new(policy: TruncationPolicy, dom: DomainParams) -> Self {
        Self { policy, dom }
    }

    fn admits(&self, degree: u32, order: u32) -> bool {
        degree <= self.policy.p_degree && order <= self.policy.fourier_order
    }
}

/// Result of a capped operation: the kept series and the weighted norm of
/// everything the caps removed.
#[derive(Clone, Debug)]
pub struct Truncated {
    pub series: FourierTaylor,
    pub loss: f64,
}

/// Fixed hasher: iteration order, and with it the rounding of the loss
/// sums, must not change between runs.
type StableMap = HashMap<MultiIndex, Complex64, BuildHasherDefault<DefaultHasher>>;

struct Accumulator<'a> {
    trunc: &'a Truncation,
    terms: StableMap,
    dropped: StableMap,
}

impl<'a> Accumulator<'a> {
    fn new(trunc: &'a Truncation) -> Self {
        Self {
            trunc,
            terms: StableMap::default(),
            dropped: StableMap::default(),
        }
    }

    fn push(&mut self, m: Powers, k: Wave, c: Complex64) {
        let degree: u32 = m.iter().map(|&e| u32::from(e)).sum();
        let order: u32 = k.iter().map(|&v| v.unsigned_abs()).sum();
        let target = if self.trunc.admits(degree, order) {
            &mut self.terms
        } else {
            &mut self.dropped
        };
        *target.entry(MultiIndex { m, k }).or_default() += c;
    }

    fn finish(self, n: usize) -> Truncated {
        let dom = &self.trunc.dom;
        let floor = self.trunc.policy.coeff_floor;
        let mut loss: f64 = self
            .dropped
            .iter()
            .map(|(idx, c)| c.norm() * dom.weight(idx))
            .fold(0.0, |a, b| a + b);
        let size = |idx: &MultiIndex, c: &Complex64| c.norm() * dom.weight(idx);
        let mut map: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (idx, c) in &self.terms {
            let own = size(idx, c);
            // Decide on the pair so that a kept term never loses its partner.
            let partner = self.terms.get(&idx.conjugate()).map_or(0.0, |pc| size(idx, pc));
            if own.max(partner) < floor {
                loss += own;
            } else if own > 0.0 {
                map.insert(idx.clone(), *c);
            }
        }
        let mut series = FourierTaylor::from_map_unchecked(n, map);
        series.hermitize();
        Truncated { series, loss }
    }
}

struct Term<'a> {
    idx: &'a MultiIndex,
    c: Complex64,
    degree: u32,
}

fn collect_terms(f: &FourierTaylor) -> Vec<Term<'_>> {
    f.iter()
        .map(|(idx, c)| Term {
            idx,
            c: *c,
            degree: idx.degree(),
        })
        .collect()
}

/// Truncated product `f · g`.
pub fn multiply(f: &FourierTaylor, g: &FourierTaylor, trunc: &Truncation) -> Result<Truncated, SeriesError> {
    f.check_dim(g)?;
    let n = f.n();
    let mut acc = Accumulator::new(trunc);
    let gt = collect_terms(g);
    for a in collect_terms(f) {
        for b in &gt {
            let m: Powers = (0..n).map(|j| a.idx.m[j] + b.idx.m[j]).collect();
            let k: Wave = (0..n).map(|j| a.idx.k[j] + b.idx.k[j]).collect();
            acc.push(m, k, a.c * b.c);
        }
    }
    Ok(acc.finish(n))
}

/// Truncated Poisson bracket
/// `{f, g} = Σ_j (∂f/∂q_j ∂g/∂p_j − ∂f/∂p_j ∂g/∂q_j)`.
pub fn poisson_bracket(f: &FourierTaylor, g: &FourierTaylor, trunc: &Truncation) -> Result<Truncated, SeriesError> {
    f.check_dim(g)?;
    let n = f.n();
    let mut acc = Accumulator::new(trunc);
    let gt = collect_terms(g);
    for a in collect_terms(f) {
        for b in &gt {
            if a.degree + b.degree == 0 {
                continue;
            }
            let k: Wave = (0..n).map(|j| a.idx.k[j] + b.idx.k[j]).collect();
            let prod = a.c * b.c;
            for j in 0..n {
                // Both bracket halves land on the same index m_a + m_b − e_j.
                let factor =
                    i64::from(a.idx.k[j]) * i64::from(b.idx.m[j]) - i64::from(a.idx.m[j]) * i64::from(b.idx.k[j]);
                if factor == 0 {
                    continue;
                }
                let mut m: Powers = (0..n).map(|i| a.idx.m[i] + b.idx.m[i]).collect();
                m[j] -= 1;
                acc.push(m, k.clone(), prod * Complex64::new(0.0, factor as f64));
            }
        }
    }
    Ok(acc.finish(n))
}

/// Lie derivative `L_χ f = {f, χ}`.
///
/// With this orientation `exp(L_χ) f = f ∘ Φ_χ`, where `Φ_χ` is the time-one
/// flow of the Hamiltonian `χ`, and `χ = Σ c_k/(i k·ω) e^{ik·q}` solves
/// `L_χ(ω·p) + Σ c_k e^{ik·q} = 0`.
pub fn lie_derivative(chi: &FourierTaylor, f: &FourierTaylor, trunc: &Truncation) -> Result<Truncated, SeriesError> {
    poisson_bracket(f, chi, trunc)
}

/// Outcome of a Lie-series evaluation.
#[derive(Clone, Debug)]
pub struct LieSeries {
    pub series: FourierTaylor,
    /// Weighted norm of terms removed by the degree/order caps.
    pub dropped: f64,
    /// Norm of the last included term: the estimate of the neglected tail.
    pub tail: f64,
    /// Highest power `s` of `L_χ` included.
    pub order: usize,
    /// False if the term norms were still not decreasing at `s_max`.
    pub converged: bool,
}

impl LieSeries {
    /// Everything this evaluation failed to represent.
    pub fn loss(&self) -> f64 {
        self.dropped + self.tail
    }
}

/// `exp(L_χ) f = Σ_{s≥0} (1/s!) L_χ^s f`.
pub fn lie_series_apply(chi: &FourierTaylor, f: &FourierTaylor, trunc: &Truncation) -> Result<LieSeries, SeriesError> {
    lie_series_weighted(chi, f, trunc, 0, |s| 1.0 / factorial(s))
}

/// `Σ_{s≥start} weight(s) L_χ^s f`, truncated per the policy.
pub fn lie_series_weighted<W>(
    chi: &FourierTaylor,
    f: &FourierTaylor,
    trunc: &Truncation,
    start: usize,
    weight: W,
) -> Result<LieSeries, SeriesError>
where
    W: Fn(usize) -> f64,
{
    chi.check_dim(f)?;
    let dom = &trunc.dom;
    let threshold = trunc.policy.tail_tol * f.weighted_norm(dom);
    let mut out = FourierTaylor::zero(f.n());
    let mut power = f.clone();
    let mut dropped = 0.0;
    let mut tail = 0.0;
    let mut previous = f64::INFINITY;
    let mut order = 0;
    let mut converged = true;
    let s_max = trunc.policy.lie_order.max(start);
    for s in 0..=s_max {
        if s > 0 {
            if chi.is_zero() || power.is_zero() {
                tail = 0.0;
                break;
            }
            let next = lie_derivative(chi, &power, trunc)?;
            dropped += next.loss * weight(s).abs();
            power = next.series;
            if power.is_zero() {
                // exact termination
                tail = 0.0;
                break;
            }
        }
        if s < start {
            continue;
        }
        let w = weight(s);
        let term_norm = power.weighted_norm(dom) * w.abs();
        out.add_scaled_assign(&power, w)?;
        order = s;
        tail = term_norm;
        if power.is_zero() || term_norm < threshold {
            break;
        }
        if s == s_max && term_norm >= previous {
            converged = false;
        }
        previous = term_norm;
    }
    Ok(LieSeries {
        series: out,
        dropped,
        tail,
        order,
        converged,
    })
}

pub(crate) fn factorial(s: usize) -> f64 {
    (1..=s).map(|v| v as f64).product()
}
