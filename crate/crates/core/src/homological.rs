//! Diophantine frequencies and the homological equation
//! `L_χ(ω·p) + rhs = 0`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HomologicalError, SeriesError};
use crate::fourier_taylor::{format_wave, FourierTaylor, MultiIndex};
use crate::tolerances::{AVERAGE_RESIDUE, RESONANCE_GUARD};

/// Target frequency `ω` with the Diophantine constants `γ`, `τ` it is
/// claimed to satisfy: `|k·ω| > γ |k|^{-τ}` for all `k ≠ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineFrequency {
    pub omega: Vec<f64>,
    pub gamma: f64,
    pub tau: f64,
}

impl DiophantineFrequency {
    pub fn new(omega: Vec<f64>, gamma: f64, tau: f64) -> Self {
        Self { omega, gamma, tau }
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn divisor(&self, k: &[i32]) -> f64 {
        k.iter()
            .zip(&self.omega)
            .map(|(&kj, &wj)| f64::from(kj) * wj)
            .fold(0.0, |a, b| a + b)
    }

    /// Lower bound `γ |k|^{-τ}`.
    pub fn bound(&self, order: u32) -> f64 {
        self.gamma * f64::from(order).powf(-self.tau)
    }

    /// `|ω| = Σ |ω_j|`.
    pub fn l1_norm(&self) -> f64 {
        self.omega.iter().map(|w| w.abs()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderMinimum {
    pub order: u32,
    pub min_divisor: f64,
    pub argmin: Vec<i32>,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: Vec<i32>,
    pub divisor: f64,
    pub bound: f64,
}

/// Outcome of a finite-horizon Diophantine check. Wavevectors are reported
/// with their first non-zero component positive (`k` and `−k` give the
/// same divisor).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub horizon: u32,
    pub per_order: Vec<OrderMinimum>,
    pub worst_k: Vec<i32>,
    pub worst_divisor: f64,
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl DiophantineReport {
    pub fn describe_failure(&self) -> String {
        const SHOWN: usize = 5;
        let list: Vec<String> = self
            .violations
            .iter()
            .take(SHOWN)
            .map(|v| format!("k = {} (k·ω = {:e})", format_wave(&v.k), v.divisor))
            .collect();
        let more = self.violations.len().saturating_sub(SHOWN);
        let tail = if more > 0 {
            format!(" and {more} more")
        } else {
            String::new()
        };
        format!("Diophantine condition fails at {}{tail}", list.join(", "))
    }
}

/// Enumerates every `k` with `0 < |k| ≤ horizon`.
pub fn check_diophantine(freq: &DiophantineFrequency, horizon: u32) -> DiophantineReport {
    let horizon = horizon.max(1);
    let mut per_order: Vec<Option<(f64, Vec<i32>)>> = vec![None; horizon as usize + 1];
    let mut violations = Vec::new();
    for_each_wave(freq.n(), horizon, |k| {
        let order: u32 = k.iter().map(|c| c.unsigned_abs()).sum();
        let d = freq.divisor(k).abs();
        let slot = &mut per_order[order as usize];
        if slot.as_ref().is_none_or(|(best, _)| d < *best) {
            *slot = Some((d, k.to_vec()));
        }
        let bound = freq.bound(order);
        if !(d > bound) || is_resonant(d, order) {
            violations.push(Violation {
                k: k.to_vec(),
                divisor: d,
                bound,
            });
        }
    });
    let per_order: Vec<OrderMinimum> = per_order
        .into_iter()
        .enumerate()
        .filter_map(|(order, slot)| {
            slot.map(|(min_divisor, argmin)| OrderMinimum {
                order: order as u32,
                min_divisor,
                argmin,
                bound: freq.bound(order as u32),
            })
        })
        .collect();
    let (worst_divisor, worst_k) =
        per_order
            .iter()
            .map(|o| (o.min_divisor, o.argmin.clone()))
            .fold(
                (f64::INFINITY, Vec::new()),
                |acc, cur| if cur.0 < acc.0 { cur } else { acc },
            );
    DiophantineReport {
        horizon,
        per_order,
        worst_k,
        worst_divisor,
        pass: violations.is_empty(),
        violations,
    }
}

fn is_resonant(divisor: f64, order: u32) -> bool {
    divisor.abs() < RESONANCE_GUARD * f64::from(order)
}

/// Calls `visit` on one representative of each `±k` pair with
/// `0 < |k| ≤ horizon`, in lexicographic order.
fn for_each_wave<F: FnMut(&[i32])>(n: usize, horizon: u32, mut visit: F) {
    let h = horizon as i32;
    let mut k = vec![0i32; n];
    fn recurse<F: FnMut(&[i32])>(k: &mut [i32], j: usize, budget: i32, positive: bool, visit: &mut F) {
        if j == k.len() {
            if positive {
                visit(k);
            }
            return;
        }
        // Before the first non-zero entry only non-negative values are allowed.
        let lo = if positive { -budget } else { 0 };
        for v in lo..=budget {
            k[j] = v;
            recurse(k, j + 1, budget - v.abs(), positive || v > 0, visit);
        }
        k[j] = 0;
    }
    recurse(&mut k, 0, h, false, &mut visit);
}

/// Solution of a homological equation.
#[derive(Clone, Debug)]
pub struct HomologicalSolution {
    pub chi: FourierTaylor,
    /// Smallest `|k·ω|` divided by; infinite when `rhs = 0`.
    pub min_divisor: f64,
}

/// Solves `L_χ(ω·p) + rhs = 0` for `χ`, i.e. `χ_{m,k} = rhs_{m,k} / (i k·ω)`.
///
/// Action-dependent coefficients pass through unchanged, so the same routine
/// serves the angle-only equation and the one linear in `p`.
pub fn solve_homological(
    rhs: &FourierTaylor,
    freq: &DiophantineFrequency,
) -> Result<HomologicalSolution, HomologicalError> {
    if rhs.n() != freq.n() {
        return Err(SeriesError::DimensionMismatch {
            left: rhs.n(),
            right: freq.n(),
        }
        .into());
    }
    let average = rhs.angle_average();
    let avg_size = average.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    if avg_size > AVERAGE_RESIDUE {
        return Err(HomologicalError::AverageNotRemoved { size: avg_size });
    }
    let mut terms: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
    let mut min_divisor = f64::INFINITY;
    for (idx, c) in rhs.iter() {
        if idx.is_average() {
            continue;
        }
        let d = freq.divisor(&idx.k);
        if is_resonant(d, idx.order()) {
            return Err(HomologicalError::ZeroDivisor {
                k: format_wave(&idx.k),
                divisor: d,
            });
        }
        min_divisor = min_divisor.min(d.abs());
        terms.insert(idx.clone(), c / Complex64::new(0.0, d));
    }
    let mut chi = FourierTaylor::from_map_unchecked(rhs.n(), terms);
    chi.hermitize();
    Ok(HomologicalSolution { chi, min_divisor })
}

/// `(τ/(e δ σ))^τ`, taken as 1 when `τ = 0`.
pub fn small_divisor_factor(tau: f64, delta_sigma: f64) -> f64 {
    if tau == 0.0 {
        1.0
    } else {
        (tau / (std::f64::consts::E * delta_sigma)).powf(tau)
    }
}
