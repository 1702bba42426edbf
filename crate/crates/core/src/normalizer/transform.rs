use serde::{Deserialize, Serialize};

use super::step::GeneratorPair;
use crate::error::NormalizeError;
use crate::fourier_taylor::{
    factorial, lie_series_weighted, DomainParams, Evaluator, FourierTaylor, Truncation, TruncationPolicy,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Normalized coordinates to original ones.
    Forward,
    /// Original coordinates to normalized ones.
    Inverse,
}

/// Time-one flow of one generator, stored as displacement series
/// `Φ(p, q) = (p + Δp(p, q), q + Δq(p, q))`.
#[derive(Clone, Debug)]
struct FlowMap {
    /// `Δp_1, ..., Δp_n, Δq_1, ..., Δq_n`.
    displacement: Option<Evaluator>,
}

impl FlowMap {
    /// `Δx_j = Σ_{s≥1} L_χ^s x_j / s!`, with `L_χ p_j = −∂χ/∂q_j` and
    /// `L_χ q_j = ∂χ/∂p_j`.
    fn new(chi: &FourierTaylor, tr: &Truncation) -> Result<Self, NormalizeError> {
        if chi.is_zero() {
            return Ok(Self { displacement: None });
        }
        let n = chi.n();
        let mut series = Vec::with_capacity(2 * n);
        for first in (0..n)
            .map(|j| chi.derivative_q(j).scale(-1.0))
            .chain((0..n).map(|j| chi.derivative_p(j)))
        {
            series.push(lie_series_weighted(chi, &first, tr, 0, |s| 1.0 / factorial(s + 1))?.series);
        }
        Ok(Self {
            displacement: Some(Evaluator::new(&series)),
        })
    }

    fn apply(&self, p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let Some(ev) = &self.displacement else {
            return (p.to_vec(), q.to_vec());
        };
        let n = p.len();
        let d = ev.eval(p, q);
        let np = (0..n).map(|j| p[j] + d[j]).collect();
        let nq = (0..n).map(|j| q[j] + d[n + j]).collect();
        (np, nq)
    }
}

/// Composition of all generator flows, prepared once and applied to many
/// points.
#[derive(Clone, Debug)]
pub struct CanonicalTransform {
    /// `forward[k] = (Φ_{χ0⁽ᵏ⁺¹⁾}, Φ_{χ1⁽ᵏ⁺¹⁾})`.
    forward: Vec<(FlowMap, FlowMap)>,
    inverse: Vec<(FlowMap, FlowMap)>,
    /// `rho[k]` bounds the actions between stage `k` and `k + 1`.
    rho: Vec<f64>,
}

impl CanonicalTransform {
    /// `domains` holds `dom_0, ..., dom_N`; pass `None` to skip the domain
    /// check.
    pub fn new(
        generators: &[GeneratorPair],
        policy: &TruncationPolicy,
        domains: Option<&[DomainParams]>,
    ) -> Result<Self, NormalizeError> {
        let fallback = DomainParams::new(1.0, 1.0)?;
        let dom_of = |k: usize| domains.and_then(|d| d.get(k).copied()).unwrap_or(fallback);
        let mut forward = Vec::with_capacity(generators.len());
        let mut inverse = Vec::with_capacity(generators.len());
        for (k, g) in generators.iter().enumerate() {
            let tr = Truncation::new(*policy, dom_of(k));
            forward.push((FlowMap::new(&g.chi0, &tr)?, FlowMap::new(&g.chi1, &tr)?));
            inverse.push((
                FlowMap::new(&g.chi0.scale(-1.0), &tr)?,
                FlowMap::new(&g.chi1.scale(-1.0), &tr)?,
            ));
        }
        let rho = match domains {
            Some(d) => d.iter().map(|x| x.rho).collect(),
            None => vec![f64::INFINITY; generators.len() + 1],
        };
        Ok(Self { forward, inverse, rho })
    }

    pub fn stages(&self) -> usize {
        self.forward.len()
    }

    fn check(&self, stage: usize, p: &[f64]) -> Result<(), NormalizeError> {
        let rho = self.rho.get(stage).copied().unwrap_or(f64::INFINITY);
        let p_abs = p.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if p_abs > rho {
            return Err(NormalizeError::OutOfDomain { stage, p_abs, rho });
        }
        Ok(())
    }

    /// Forward applies `Φ_{χ1⁽ᴺ⁾}` first and `Φ_{χ0⁽¹⁾}` last; inverse runs
    /// the negated generators in the opposite order.
    pub fn apply(&self, p: &[f64], q: &[f64], direction: Direction) -> Result<(Vec<f64>, Vec<f64>), NormalizeError> {
        let mut p = p.to_vec();
        let mut q = q.to_vec();
        match direction {
            Direction::Forward => {
                self.check(self.stages(), &p)?;
                for (k, (phi0, phi1)) in self.forward.iter().enumerate().rev() {
                    (p, q) = phi1.apply(&p, &q);
                    (p, q) = phi0.apply(&p, &q);
                    self.check(k, &p)?;
                }
            }
            Direction::Inverse => {
                self.check(0, &p)?;
                for (k, (phi0, phi1)) in self.inverse.iter().enumerate() {
                    (p, q) = phi0.apply(&p, &q);
                    (p, q) = phi1.apply(&p, &q);
                    self.check(k + 1, &p)?;
                }
            }
        }
        Ok((p, q))
    }
}

/// One-shot convenience wrapper around [`CanonicalTransform`] without the
/// domain check.
pub fn transform_point(
    generators: &[GeneratorPair],
    p: &[f64],
    q: &[f64],
    direction: Direction,
) -> Result<(Vec<f64>, Vec<f64>), NormalizeError> {
    CanonicalTransform::new(generators, &TruncationPolicy::default(), None)?.apply(p, q, direction)
}
