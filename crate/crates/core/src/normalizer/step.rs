use serde::{Deserialize, Serialize};

use super::state::{HamiltonianState, Residual};
use crate::error::NormalizeError;
use crate::fourier_taylor::{
    factorial, lie_derivative, lie_series_weighted, DomainParams, FourierTaylor, LieSeries, Truncation,
    TruncationPolicy,
};
use crate::homological::solve_homological;

/// Generating functions of one normalization step and the frequency shift
/// it extracted from the angle average of `h_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorPair {
    pub chi0: FourierTaylor,
    pub chi1: FourierTaylor,
    pub detuning_increment: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub delta: f64,
    pub dom: DomainParams,
    pub residual_in: Residual,
    pub residual_out: Residual,
    pub detuning_increment: Vec<f64>,
    pub detuning_increment_norm: f64,
    pub chi0_norm: f64,
    pub chi1_norm: f64,
    pub min_divisor: f64,
    pub max_lie_order: usize,
    pub trunc_loss: f64,
}

pub struct StepOutcome {
    pub state: HamiltonianState,
    pub generators: GeneratorPair,
    pub diagnostics: StepDiagnostics,
}

/// Loss bookkeeping shared by every operation of one step.
struct Books<'a> {
    tr: &'a Truncation,
    step: usize,
    loss: f64,
    max_order: usize,
}

impl Books<'_> {
    fn lie(&mut self, chi: &FourierTaylor, f: &FourierTaylor) -> Result<FourierTaylor, NormalizeError> {
        let t = lie_derivative(chi, f, self.tr)?;
        self.loss += t.loss;
        Ok(t.series)
    }

    fn series<W: Fn(usize) -> f64>(
        &mut self,
        chi: &FourierTaylor,
        f: &FourierTaylor,
        start: usize,
        weight: W,
    ) -> Result<FourierTaylor, NormalizeError> {
        let LieSeries {
            series,
            dropped,
            tail,
            order,
            converged,
        } = lie_series_weighted(chi, f, self.tr, start, weight)?;
        if !converged {
            return Err(NormalizeError::LieDivergence { step: self.step });
        }
        self.loss += dropped + tail;
        self.max_order = self.max_order.max(order);
        Ok(series)
    }
}

/// One step of the normalization: removes `h_0`, moves `⟨h_1⟩` into the
/// detuning, removes the rest of `h_1`, and returns the new state on the
/// domain shrunk by `1 − 4δ`.
///
/// `state.detuning_tail` is the incoming `δω`; the step uses `δω + c` where
/// it needs `δω′` and leaves the stored tail to the driver.
pub fn normalization_step(
    state: &HamiltonianState,
    policy: &TruncationPolicy,
    step: usize,
    delta: f64,
) -> Result<StepOutcome, NormalizeError> {
    let n = state.n();
    let tr = Truncation::new(*policy, state.dom);
    let mut books = Books {
        tr: &tr,
        step,
        loss: 0.0,
        max_order: 0,
    };
    let residual_in = state.residual();
    let top = state.parts.len() - 1;
    let homological = |rhs: &FourierTaylor| {
        solve_homological(rhs, &state.freq).map_err(|source| NormalizeError::Homological { step, source })
    };

    let sol0 = homological(&state.part(0).off_average())?;
    let chi0 = sol0.chi;

    // powers[j][s] = L_χ0^s h_j, of grade j − s.
    let mut powers: Vec<Vec<FourierTaylor>> = Vec::with_capacity(top + 1);
    for j in 0..=top {
        let mut row = vec![state.part(j)];
        for _ in 0..j {
            let next = books.lie(&chi0, row.last().expect("row starts non-empty"))?;
            if next.is_zero() {
                break;
            }
            row.push(next);
        }
        powers.push(row);
    }
    let power = |j: usize, s: usize| powers.get(j).and_then(|r| r.get(s));
    let graded_sum = |l: usize, from: usize| {
        let mut acc = FourierTaylor::zero(n);
        let mut s = from;
        while s + l <= top {
            if let Some(t) = power(s + l, s) {
                acc.add_scaled_assign(t, 1.0 / factorial(s)).expect("same dimension");
            }
            s += 1;
        }
        acc
    };

    let g1 = graded_sum(1, 0);
    let increment = g1.linear_average_coefficients();
    let shifted: Vec<f64> = (0..n).map(|j| state.detuning_tail[j] + increment[j]).collect();

    // ĥ_0 = L_χ0(δω'·p − Σ_{s≥1} ⟨L^s h_{s+1}⟩/s!) + L_χ0(h_1 − ⟨h_1⟩) + Σ_{s≥2} L^s h_s / s!
    let avg_tail = graded_sum(1, 1).angle_average();
    let arg = FourierTaylor::linear(&shifted).add_scaled(&avg_tail, -1.0)?;
    let mut hat0 = books.lie(&chi0, &arg)?;
    hat0.add_scaled_assign(&books.lie(&chi0, &state.part(1).off_average())?, 1.0)?;
    hat0.add_scaled_assign(&graded_sum(0, 2), 1.0)?;
    let hat0 = hat0.without_constant();

    // ĥ_1 = Σ_s L^s h_{s+1}/s! + (δω − δω')·p
    let hat1 = g1.add_scaled(&FourierTaylor::linear(&increment), -1.0)?;
    let hats: Vec<FourierTaylor> = (2..=top).map(|l| graded_sum(l, 0)).collect();

    let sol1 = homological(&hat1)?;
    let chi1 = sol1.chi;

    let mut parts = Vec::with_capacity(top + 1);
    parts.push(
        books
            .series(&chi1, &hat0, 0, |s| 1.0 / factorial(s))?
            .without_constant(),
    );
    let mut new1 = books.series(&chi1, &hat1, 1, |s| s as f64 / factorial(s + 1))?;
    let detuned = FourierTaylor::linear(&shifted);
    new1.add_scaled_assign(&books.series(&chi1, &detuned, 1, |s| 1.0 / factorial(s))?, 1.0)?;
    parts.push(new1);
    for h in &hats {
        parts.push(books.series(&chi1, h, 0, |s| 1.0 / factorial(s))?);
    }

    let mut next = HamiltonianState {
        freq: state.freq.clone(),
        detuning_tail: state.detuning_tail.clone(),
        parts,
        dom: state.dom.scaled(1.0 - 4.0 * delta),
        eps_norm: 0.0,
    };
    next.refresh();
    let residual_out = next.residual();
    let loss = books.loss;
    let max_lie_order = books.max_order;
    if residual_in.max() > 0.0 && loss > residual_in.max() {
        return Err(NormalizeError::TruncationOverflow {
            step,
            loss,
            residual: residual_in.max(),
        });
    }
    let diagnostics = StepDiagnostics {
        step,
        delta,
        dom: next.dom,
        residual_in,
        residual_out,
        detuning_increment_norm: increment.iter().map(|c| c.abs()).fold(0.0, f64::max),
        detuning_increment: increment.clone(),
        chi0_norm: chi0.weighted_norm(&state.dom),
        chi1_norm: chi1.weighted_norm(&state.dom),
        min_divisor: sol0.min_divisor.min(sol1.min_divisor),
        max_lie_order,
        trunc_loss: loss,
    };
    Ok(StepOutcome {
        state: next,
        generators: GeneratorPair {
            chi0,
            chi1,
            detuning_increment: increment,
        },
        diagnostics,
    })
}
