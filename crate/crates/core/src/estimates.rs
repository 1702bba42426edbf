//! Constants of the convergence proof, the parameter schedule, and the
//! comparison of both against an actual run.

use std::f64::consts::E as EULER;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::EstimateError;
use crate::fourier_taylor::{DomainParams, FourierTaylor};
use crate::homological::{small_divisor_factor, DiophantineFrequency};
use crate::normalizer::NormalFormResult;

/// `E_0 = max(‖H_0‖, ‖H_1‖)` for `H = H_0(p) + ε H_1(p, q)`: the angle
/// average (including the linear part) and the oscillating part divided
/// by `ε`. With `ε = 0` the oscillating part is absent.
pub fn size_constant(hamiltonian: &FourierTaylor, eps: f64, dom: &DomainParams) -> f64 {
    let h0 = hamiltonian.angle_average().weighted_norm(dom);
    let h1 = hamiltonian.off_average().weighted_norm(dom);
    if eps > 0.0 {
        h0.max(h1 / eps)
    } else {
        h0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Condition {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub e0: f64,
    pub e: f64,
    /// `K_1, ..., K_11`.
    pub k: [f64; 11],
    pub lambda: f64,
    pub rho: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub tau: f64,
}

impl ConstantsLedger {
    /// `K_j` with the 1-based numbering of the proof.
    pub fn kk(&self, j: usize) -> f64 {
        self.k[j - 1]
    }

    /// The three smallness conditions of one step.
    pub fn conditions(&self, eps: f64, delta: f64) -> Vec<Condition> {
        let rs = self.rho * self.sigma;
        let t = self.tau;
        vec![
            Condition::new(
                "chi0_smallness",
                2.0 * EULER * self.kk(1) * eps / (delta.powf(t + 2.0) * rs),
                0.5,
            ),
            Condition::new(
                "chi1_smallness",
                2.0 * EULER * self.kk(8) * eps / (delta.powf(2.0 * t + 4.0) * rs),
                1.0,
            ),
            Condition::new("lambda_smallness", self.lambda * eps / delta.powf(3.0 * t + 6.0), 1.0),
        ]
    }
}

/// Evaluates `E = 2^{n-1} E_0` and the chain `K_1, ..., K_11`, `Λ`.
pub fn compute_constants(e0: f64, n: usize, freq: &DiophantineFrequency, dom: &DomainParams) -> ConstantsLedger {
    let (rho, sigma, gamma, tau) = (dom.rho, dom.sigma, freq.gamma, freq.tau);
    let e = 2f64.powi(n as i32 - 1) * e0;
    let rs = rho * sigma;
    let factor = small_divisor_factor(tau, sigma);
    let k1 = factor * e / gamma;
    let k2 = 2.0 * k1 * e / (EULER * rs);
    let k3 = 8.0 * k1 * k1 * e / (rs * rs);
    let k4 = 24.0 * k1 * k1 * e / (rs * rs);
    let k5 = e + k2;
    let k6 = k2 / (2.0 * e) + k4 / 4.0 + k2 / 2.0 + k3 / 4.0;
    let k7 = e + e / (EULER * EULER);
    let k8 = factor * k5 / gamma;
    let k9 = 2.0 * k6 / (EULER * EULER);
    let k10 = 2.0 * (k5 + 1.0) * k8 / (EULER * rs);
    let k11 = 2.0 * k7 / (EULER * EULER);
    let k = [k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11];
    let lambda = k
        .iter()
        .copied()
        .chain([2.0 * EULER * k1 / rs, 2.0 * EULER * k8 / rs])
        .fold(1.0, f64::max);
    ConstantsLedger {
        e0,
        e,
        k,
        lambda,
        rho,
        sigma,
        gamma,
        tau,
    }
}

/// `ε* = min(1/(Λ α^{3τ+6}), 1/(α^{τ+2}(K_5 + 1)))`.
pub fn epsilon_threshold(ledger: &ConstantsLedger, alpha: f64, tau: f64) -> f64 {
    let first = 1.0 / (ledger.lambda * alpha.powf(3.0 * tau + 6.0));
    let second = 1.0 / (alpha.powf(tau + 2.0) * (ledger.kk(5) + 1.0));
    first.min(second)
}

/// `Π_{k≥1} (1 − 4α^{-k})`, multiplied until the factors are 1 in double
/// precision.
pub fn domain_product(alpha: f64) -> f64 {
    let mut prod = 1.0;
    let mut d = 1.0 / alpha;
    while 4.0 * d > f64::EPSILON / 4.0 {
        prod *= 1.0 - 4.0 * d;
        d /= alpha;
    }
    prod
}

/// `Σ_{k≥1} α^{-k}`, summed from the smallest term up.
pub fn delta_series_sum(alpha: f64) -> f64 {
    let mut terms = Vec::new();
    let mut d = 1.0 / alpha;
    while d > f64::EPSILON * 1e-3 {
        terms.push(d);
        d /= alpha;
    }
    terms.iter().rev().fold(0.0, |a, b| a + b)
}

/// Closed form of the a-priori detuning condition at step `k`:
/// `K_5 x^{k+1}/(1 − x) ≤ x^k` with `x = α^{τ+2} ε_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningCheck {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn detuning_condition(k5: f64, ratio: f64, k: usize) -> DetuningCheck {
    let lhs = k5 * ratio.powi(k as i32 + 1) / (1.0 - ratio);
    let rhs = ratio.powi(k as i32);
    DetuningCheck {
        k,
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

/// `K_5 Σ_{j=k+1}^{k+terms} x^j`, the partial sum the closed form replaces.
pub fn detuning_partial_sum(k5: f64, ratio: f64, k: usize, terms: usize) -> f64 {
    let mut sum = 0.0;
    for j in (k + 1..=k + terms).rev() {
        sum += ratio.powi(j as i32);
    }
    k5 * sum
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub alpha: f64,
    pub eps0: f64,
    pub tau: f64,
    /// Index `k = 1..=steps`.
    pub delta: Vec<f64>,
    /// Index `k = 0..=steps`.
    pub eps: Vec<f64>,
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rho_star: f64,
    pub sigma_star: f64,
    pub delta_sum: f64,
    pub domain_product: f64,
    /// `α^{τ+2} ε_0`.
    pub ratio: f64,
    pub detuning_checks: Vec<DetuningCheck>,
}

/// `δ_k = α^{-k}`, `ε_k = ε_0^{k+1}`, `ρ_k = Π_{j≤k}(1 − 4δ_j) ρ`.
pub fn predicted_schedule(
    eps0: f64,
    alpha: f64,
    dom: &DomainParams,
    steps: usize,
    ledger: &ConstantsLedger,
) -> Result<ScheduleParams, EstimateError> {
    if !(alpha > 4.0) {
        return Err(EstimateError::AlphaTooSmall(alpha));
    }
    let tau = ledger.tau;
    let ratio = alpha.powf(tau + 2.0) * eps0;
    if ratio >= 1.0 {
        return Err(EstimateError::ScheduleInvalid { ratio });
    }
    let delta: Vec<f64> = (1..=steps).map(|k| alpha.powi(-(k as i32))).collect();
    let eps: Vec<f64> = (0..=steps).map(|k| eps0.powi(k as i32 + 1)).collect();
    let mut rho = vec![dom.rho];
    let mut sigma = vec![dom.sigma];
    for d in &delta {
        rho.push(rho.last().expect("seeded") * (1.0 - 4.0 * d));
        sigma.push(sigma.last().expect("seeded") * (1.0 - 4.0 * d));
    }
    let detuning_checks = (1..=steps)
        .map(|k| detuning_condition(ledger.kk(5), ratio, k))
        .collect();
    Ok(ScheduleParams {
        alpha,
        eps0,
        tau,
        delta,
        eps,
        rho,
        sigma,
        rho_star: dom.rho / 2.0,
        sigma_star: dom.sigma / 2.0,
        delta_sum: delta_series_sum(alpha),
        domain_product: domain_product(alpha),
        ratio,
        detuning_checks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepComparison {
    pub step: usize,
    pub residual_h0: f64,
    pub residual_h1: f64,
    pub observed_residual: f64,
    pub predicted_eps_k: f64,
    /// `ε_k E`, the bound on `‖h_0⁽ᵏ⁾‖` the proof carries.
    pub predicted_bound: f64,
    pub detuning_increment_norm: f64,
    pub trunc_loss: f64,
    /// `‖δω⁽ᵏ⁾·p‖` at the step's domain.
    pub tail_norm: f64,
    /// `ε_{k-1}/(2δ_k^{τ+2})`, as printed.
    pub tail_bound_plain: f64,
    /// The same with the factor `E` carried by the neighbouring estimates.
    pub tail_bound_scaled: f64,
    pub conditions: Vec<Condition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningComparison {
    /// `‖δω⁽⁰⁾·p‖` at half the initial domain.
    pub observed: f64,
    /// `(E/2) 8^{-(2τ+4)}`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<StepComparison>,
    /// Log–log slope of `r_{k+1}` against `r_k` above the truncation floor.
    pub observed_slope: Option<f64>,
    pub theoretical_slope: f64,
    pub detuning: DetuningComparison,
    pub eps0: f64,
    pub eps_star: f64,
    pub certified: bool,
    pub regime: String,
}

impl ComparisonReport {
    /// `step,residual_h0,residual_h1,detuning_increment_norm,predicted_eps_k,trunc_loss`
    /// with every float at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,residual_h0,residual_h1,detuning_increment_norm,predicted_eps_k,trunc_loss\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.step,
                crate::output::sig17(r.residual_h0),
                crate::output::sig17(r.residual_h1),
                crate::output::sig17(r.detuning_increment_norm),
                crate::output::sig17(r.predicted_eps_k),
                crate::output::sig17(r.trunc_loss),
            );
        }
        out
    }
}

fn linear_norm(v: &[f64], rho: f64) -> f64 {
    v.iter().map(|c| c.abs() * rho).fold(0.0, |a, b| a + b)
}

/// Least-squares slope of `log r_{k+1}` against `log r_k` over the
/// residuals strictly above `floor`.
pub fn contraction_slope(residuals: &[f64], floor: f64) -> Option<f64> {
    let kept: Vec<f64> = residuals
        .iter()
        .take_while(|&&r| r > floor && r > 0.0)
        .map(|r| r.ln())
        .collect();
    if kept.len() < 3 {
        if kept.len() == 2 {
            return Some(kept[1] / kept[0]);
        }
        return None;
    }
    let pairs: Vec<(f64, f64)> = kept.windows(2).map(|w| (w[0], w[1])).collect();
    let m = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).fold(0.0, |a, b| a + b) / m;
    let my = pairs.iter().map(|p| p.1).fold(0.0, |a, b| a + b) / m;
    let sxy = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).fold(0.0, |a, b| a + b);
    let sxx = pairs.iter().map(|p| (p.0 - mx).powi(2)).fold(0.0, |a, b| a + b);
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Tabulates the run against the proof's schedule. The run is "certified"
/// only when `ε_0 ≤ ε*` and every per-step condition holds; otherwise the
/// numbers are reported as empirical behaviour.
pub fn compare_predicted_observed(
    schedule: &ScheduleParams,
    ledger: &ConstantsLedger,
    result: &NormalFormResult,
) -> ComparisonReport {
    let tau = schedule.tau;
    let mut rows = Vec::with_capacity(result.steps.len() + 1);
    let initial = result.initial_residual;
    let predicted = |k: usize| schedule.eps0.powi(k as i32 + 1);
    rows.push(StepComparison {
        step: 0,
        residual_h0: initial.norm_h0,
        residual_h1: initial.norm_h1_offavg,
        observed_residual: initial.max(),
        predicted_eps_k: predicted(0),
        predicted_bound: predicted(0) * ledger.e,
        detuning_increment_norm: 0.0,
        trunc_loss: 0.0,
        tail_norm: linear_norm(&result.detuning0, result.domains[0].rho),
        tail_bound_plain: f64::NAN,
        tail_bound_scaled: f64::NAN,
        conditions: Vec::new(),
    });
    for d in &result.steps {
        let k = d.step;
        let delta = d.delta;
        let eps_prev = predicted(k - 1);
        let tail = result.tails.get(k).map_or(0.0, |t| linear_norm(t, d.dom.rho));
        let plain = eps_prev / (2.0 * delta.powf(tau + 2.0));
        rows.push(StepComparison {
            step: k,
            residual_h0: d.residual_out.norm_h0,
            residual_h1: d.residual_out.norm_h1_offavg,
            observed_residual: d.residual_out.max(),
            predicted_eps_k: predicted(k),
            predicted_bound: predicted(k) * ledger.e,
            detuning_increment_norm: d.detuning_increment_norm,
            trunc_loss: d.trunc_loss,
            tail_norm: tail,
            tail_bound_plain: plain,
            tail_bound_scaled: plain * ledger.e,
            conditions: ledger.conditions(eps_prev, delta),
        });
    }
    let floor = 10.0 * result.accumulated_loss;
    let observed_slope = contraction_slope(&result.residual_sequence(), floor);
    let half = result.domains[0].rho / 2.0;
    let observed = linear_norm(&result.detuning0, half);
    let bound = ledger.e / 2.0 * 8f64.powf(-(2.0 * tau + 4.0));
    let eps_star = epsilon_threshold(ledger, schedule.alpha, tau);
    let certified = schedule.eps0 <= eps_star
        && schedule.alpha >= 9.0
        && rows.iter().all(|r| r.conditions.iter().all(|c| c.holds))
        && schedule.detuning_checks.iter().all(|c| c.holds);
    ComparisonReport {
        rows,
        observed_slope,
        theoretical_slope: 2.0,
        detuning: DetuningComparison {
            observed,
            bound,
            holds: observed <= bound,
        },
        eps0: schedule.eps0,
        eps_star,
        certified,
        regime: if certified {
            "certified".to_string()
        } else {
            "empirical: theorem hypotheses not verified".to_string()
        },
    }
}
