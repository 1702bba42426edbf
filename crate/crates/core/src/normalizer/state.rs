use serde::{Deserialize, Serialize};

use crate::error::SeriesError;
use crate::fourier_taylor::{DomainParams, FourierTaylor, TruncationPolicy};
use crate::homological::DiophantineFrequency;

/// `H = ω·p + δω·p + Σ_l h_l` with `h_l ∈ P_l`.
///
/// `ω` stays fixed for the whole run. `detuning_tail` is the current guess
/// for `δω`; the driver owns it. The angle average of `h_1` is the pending
/// frequency correction that the next step moves into the detuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianState {
    pub freq: DiophantineFrequency,
    pub detuning_tail: Vec<f64>,
    pub parts: Vec<FourierTaylor>,
    pub dom: DomainParams,
    /// `max(‖h_0‖, 2‖h_1‖)` at `dom`.
    pub eps_norm: f64,
}

/// Distance from Kolmogorov normal form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub norm_h0: f64,
    pub norm_h1_offavg: f64,
}

impl Residual {
    pub fn max(&self) -> f64 {
        self.norm_h0.max(self.norm_h1_offavg)
    }
}

/// Checks of the initial bounds `‖h_0‖ ≤ εE`, `‖h_1‖ ≤ εE/2`,
/// `‖h_l‖ ≤ E/2^l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartBound {
    pub grade: usize,
    pub norm: f64,
    pub bound: f64,
    pub holds: bool,
}

impl HamiltonianState {
    /// Splits `perturbation` (everything except `ω₀·p`) into graded parts.
    /// Constants are dropped; parts above the degree cap are rejected.
    pub fn from_series(
        freq: DiophantineFrequency,
        perturbation: &FourierTaylor,
        dom: DomainParams,
        policy: &TruncationPolicy,
    ) -> Result<Self, SeriesError> {
        if perturbation.n() != freq.n() {
            return Err(SeriesError::DimensionMismatch {
                left: freq.n(),
                right: perturbation.n(),
            });
        }
        let h = perturbation.without_constant();
        let top = h.max_degree().max(1) as usize;
        let parts: Vec<FourierTaylor> = (0..=top).map(|l| h.grade_project(l as i32)).collect();
        let n = freq.n();
        let mut state = Self {
            freq,
            detuning_tail: vec![0.0; n],
            parts,
            dom,
            eps_norm: 0.0,
        };
        let (kept, dropped) = state.total_parts().split_caps(policy.p_degree, policy.fourier_order);
        if !dropped.is_zero() {
            log::warn!(
                "initial Hamiltonian exceeds the truncation caps; {} terms dropped",
                dropped.len()
            );
            let top = kept.max_degree().max(1) as usize;
            state.parts = (0..=top).map(|l| kept.grade_project(l as i32)).collect();
        }
        state.refresh();
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.freq.n()
    }

    pub fn part(&self, l: usize) -> FourierTaylor {
        self.parts
            .get(l)
            .cloned()
            .unwrap_or_else(|| FourierTaylor::zero(self.n()))
    }

    pub(crate) fn refresh(&mut self) {
        while self.parts.len() < 2 {
            self.parts.push(FourierTaylor::zero(self.n()));
        }
        while self.parts.len() > 2 && self.parts.last().is_some_and(FourierTaylor::is_zero) {
            self.parts.pop();
        }
        self.eps_norm = self.parts[0]
            .weighted_norm(&self.dom)
            .max(2.0 * self.parts[1].weighted_norm(&self.dom));
    }

    /// `Σ_l h_l`.
    pub fn total_parts(&self) -> FourierTaylor {
        let mut out = FourierTaylor::zero(self.n());
        for p in &self.parts {
            out.add_scaled_assign(p, 1.0).expect("parts share the dimension");
        }
        out
    }

    /// The full Hamiltonian `(ω + δω)·p + Σ_l h_l`.
    pub fn hamiltonian(&self) -> FourierTaylor {
        let linear: Vec<f64> = self
            .freq
            .omega
            .iter()
            .zip(&self.detuning_tail)
            .map(|(w, d)| w + d)
            .collect();
        &FourierTaylor::linear(&linear) + &self.total_parts()
    }

    /// Weighted norms of `h_0` and `h_1 − ⟨h_1⟩_q` at the state's domain.
    pub fn residual(&self) -> Residual {
        Residual {
            norm_h0: self.part(0).without_constant().weighted_norm(&self.dom),
            norm_h1_offavg: self.part(1).off_average().weighted_norm(&self.dom),
        }
    }

    /// Frequency seen at `p = 0` once the pending average of `h_1` is
    /// included: `ω + δω + ∇_p⟨h_1⟩`.
    pub fn effective_frequency(&self) -> Vec<f64> {
        let avg = self.part(1).linear_average_coefficients();
        (0..self.n())
            .map(|j| self.freq.omega[j] + self.detuning_tail[j] + avg[j])
            .collect()
    }

    pub fn initial_bounds(&self, eps: f64, e: f64) -> Vec<PartBound> {
        self.parts
            .iter()
            .enumerate()
            .map(|(l, h)| {
                let bound = match l {
                    0 => eps * e,
                    1 => eps * e / 2.0,
                    _ => e / 2f64.powi(l as i32),
                };
                let norm = h.weighted_norm(&self.dom);
                PartBound {
                    grade: l,
                    norm,
                    bound,
                    holds: norm <= bound,
                }
            })
            .collect()
    }
}
