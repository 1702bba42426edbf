use serde::{Deserialize, Serialize};

use super::state::{HamiltonianState, Residual};
use super::step::{normalization_step, GeneratorPair, StepDiagnostics};
use crate::error::NormalizeError;
use crate::fourier_taylor::{DomainParams, TruncationPolicy};

fn default_steps() -> usize {
    6
}
fn default_alpha() -> f64 {
    9.0
}
fn default_max_outer() -> usize {
    8
}
fn default_floor_factor() -> f64 {
    10.0
}

/// Controls of the normalization driver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Domain schedule `δ_k = α^{-k}`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub policy: TruncationPolicy,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    /// Defaults to `1e-14 |ω|`.
    #[serde(default)]
    pub tol_outer: Option<f64>,
    /// Stop once the residual is below this multiple of the accumulated
    /// truncation loss.
    #[serde(default = "default_floor_factor")]
    pub floor_factor: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            alpha: default_alpha(),
            policy: TruncationPolicy::default(),
            max_outer: default_max_outer(),
            tol_outer: None,
            floor_factor: default_floor_factor(),
        }
    }
}

impl RunParams {
    pub fn delta(&self, k: usize) -> f64 {
        self.alpha.powi(-(k as i32))
    }

    pub fn validate(&self) -> Result<(), NormalizeError> {
        let bad = |msg: &str| Err(NormalizeError::InvalidParams(msg.to_string()));
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if !(self.alpha > 4.0) {
            return bad("alpha must exceed 4 so that every domain factor 1 - 4/alpha^k is positive");
        }
        if self.max_outer == 0 {
            return bad("max_outer must be at least 1");
        }
        if self.tol_outer.is_some_and(|t| !(t >= 0.0)) {
            return bad("tol_outer must be non-negative");
        }
        if !(self.floor_factor >= 0.0) {
            return bad("floor_factor must be non-negative");
        }
        if !(self.policy.tail_tol >= 0.0) || self.policy.lie_order == 0 {
            return bad("policy needs lie_order >= 1 and tail_tol >= 0");
        }
        Ok(())
    }
}

/// Output of [`run_normalization`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormResult {
    pub omega: Vec<f64>,
    pub omega0: Vec<f64>,
    pub detuning0: Vec<f64>,
    pub generators: Vec<GeneratorPair>,
    pub steps: Vec<StepDiagnostics>,
    pub initial_residual: Residual,
    pub final_state: HamiltonianState,
    pub outer_iterations: usize,
    pub outer_converged: bool,
    /// `max_j |δω⁽⁰⁾_j|` change per outer pass.
    pub outer_updates: Vec<f64>,
    /// `tails[k] = δω⁽ᵏ⁾` for `k = 0..=N`.
    pub tails: Vec<Vec<f64>>,
    /// `δω⁽ᴺ⁾`, the angle average left in the final `h_1`, negated.
    pub terminal_correction: Vec<f64>,
    /// Domains `dom_0, ..., dom_N`.
    pub domains: Vec<DomainParams>,
    pub accumulated_loss: f64,
    /// True when the driver stopped before `N` steps at the truncation floor.
    pub stopped_at_floor: bool,
}

impl NormalFormResult {
    pub fn final_residual(&self) -> Residual {
        self.final_state.residual()
    }

    /// `r_0, r_1, ..., r_N`.
    pub fn residual_sequence(&self) -> Vec<f64> {
        let mut out = vec![self.initial_residual.max()];
        out.extend(self.steps.iter().map(|d| d.residual_out.max()));
        out
    }
}

struct Pass {
    generators: Vec<GeneratorPair>,
    steps: Vec<StepDiagnostics>,
    final_state: HamiltonianState,
    domains: Vec<DomainParams>,
    loss: f64,
    stopped_at_floor: bool,
}

fn inner_pass(initial: &HamiltonianState, tails: &[Vec<f64>], params: &RunParams) -> Result<Pass, NormalizeError> {
    let mut state = initial.clone();
    state.detuning_tail = tails[0].clone();
    let mut generators = Vec::with_capacity(params.steps);
    let mut steps = Vec::with_capacity(params.steps);
    let mut domains = vec![state.dom];
    let mut loss = 0.0;
    let mut stopped_at_floor = false;
    for k in 1..=params.steps {
        state.detuning_tail = tails[k - 1].clone();
        let outcome = normalization_step(&state, &params.policy, k, params.delta(k))?;
        loss += outcome.diagnostics.trunc_loss;
        log::debug!(
            "step {k}: residual {:e} -> {:e}, loss {:e}",
            outcome.diagnostics.residual_in.max(),
            outcome.diagnostics.residual_out.max(),
            outcome.diagnostics.trunc_loss
        );
        let r = outcome.diagnostics.residual_out.max();
        state = outcome.state;
        domains.push(state.dom);
        generators.push(outcome.generators);
        steps.push(outcome.diagnostics);
        if k < params.steps && r <= params.floor_factor * loss {
            stopped_at_floor = true;
            break;
        }
    }
    Ok(Pass {
        generators,
        steps,
        final_state: state,
        domains,
        loss,
        stopped_at_floor,
    })
}

/// Runs `N` normalization steps inside an outer fixed point for the
/// detuning tails `δω⁽ᵏ⁾ = δω⁽ᴺ⁾ − Σ_{k<j≤N} c_j`.
pub fn run_normalization(initial: &HamiltonianState, params: &RunParams) -> Result<NormalFormResult, NormalizeError> {
    params.validate()?;
    let n = initial.n();
    let tol = params.tol_outer.unwrap_or(1e-14 * initial.freq.l1_norm());
    let mut tails = vec![vec![0.0; n]; params.steps + 1];
    let mut estimate = vec![0.0; n];
    let mut updates: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut last: Option<(Pass, Vec<f64>)> = None;
    for pass in 1..=params.max_outer {
        let run = inner_pass(initial, &tails, params)?;
        let done = run.generators.len();
        let terminal: Vec<f64> = run
            .final_state
            .part(1)
            .linear_average_coefficients()
            .iter()
            .map(|c| 0.0 - c)
            .collect();
        let mut next = vec![terminal.clone(); params.steps + 1];
        for k in (0..done).rev() {
            let c = &run.generators[k].detuning_increment;
            next[k] = (0..n).map(|j| next[k + 1][j] - c[j]).collect();
        }
        let update = (0..n).map(|j| (next[0][j] - estimate[j]).abs()).fold(0.0, f64::max);
        updates.push(update);
        log::info!("outer pass {pass}: detuning0 = {:?}, update {update:e}", next[0]);
        estimate = next[0].clone();
        tails = next;
        last = Some((run, terminal));
        if update <= tol {
            converged = true;
            break;
        }
        let u = updates.len();
        if u >= 3 && updates[u - 1] > updates[u - 2] && updates[u - 2] > updates[u - 3] {
            return Err(NormalizeError::OuterDiverged { passes: pass, updates });
        }
    }
    let (run, terminal) = last.expect("max_outer is at least 1");
    if !converged {
        log::warn!("outer detuning iteration stopped at max_outer without reaching tol_outer");
    }
    let done = run.generators.len();
    tails.truncate(done + 1);
    let mut final_state = run.final_state;
    final_state.detuning_tail = terminal.clone();
    let detuning0 = tails[0].clone();
    let omega0 = (0..n).map(|j| initial.freq.omega[j] + detuning0[j]).collect();
    Ok(NormalFormResult {
        omega: initial.freq.omega.clone(),
        omega0,
        detuning0,
        generators: run.generators,
        steps: run.steps,
        initial_residual: initial.residual(),
        final_state,
        outer_iterations: updates.len(),
        outer_converged: converged,
        outer_updates: updates,
        tails,
        terminal_correction: terminal,
        domains: run.domains,
        accumulated_loss: run.loss,
        stopped_at_floor: run.stopped_at_floor,
    })
}
