use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{advance_angle, angle_difference, integrate_orbit, HamiltonianField, IntegratorOptions};
use crate::error::VerifyError;
use crate::fourier_taylor::{DomainParams, FourierTaylor};
use crate::normalizer::{CanonicalTransform, Direction, HamiltonianState, NormalFormResult, Residual};

/// Weighted norms of `h_0` and `h_1 − ⟨h_1⟩`: zero exactly in normal form.
pub fn normal_form_residual(state: &HamiltonianState) -> Residual {
    state.residual()
}

/// The Hamiltonian the certificate integrates: the original perturbation
/// with linear frequency `ω₀ = ω + δω⁽⁰⁾`.
pub fn detuned_hamiltonian(original: &HamiltonianState, result: &NormalFormResult) -> FourierTaylor {
    &FourierTaylor::linear(&result.omega0) + &original.total_parts()
}

fn default_samples() -> usize {
    8
}
fn default_horizon() -> f64 {
    100.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusOptions {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub integrator: IntegratorOptions,
}

impl Default for TorusOptions {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            horizon: default_horizon(),
            integrator: IntegratorOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDeviation {
    pub phase: Vec<f64>,
    pub max_deviation: f64,
    pub max_p_deviation: f64,
    pub max_q_deviation: f64,
    pub energy_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusReport {
    pub sample_phases: Vec<Vec<f64>>,
    pub horizon: f64,
    pub max_deviation: f64,
    pub energy_drift: f64,
    /// Final normal-form residual plus accumulated truncation loss.
    pub residual_floor: f64,
    /// `max_deviation / (residual_floor · T)`; infinite when the floor is 0.
    pub deviation_ratio: f64,
    pub samples: Vec<SampleDeviation>,
}

/// Initial phases spread over the torus, sorted by their first component.
pub fn sample_phases(n: usize, samples: usize) -> Vec<Vec<f64>> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..samples)
        .map(|s| {
            (0..n)
                .map(|j| {
                    let frac = ((s as f64 + 0.5) / samples as f64 + j as f64 * golden).fract();
                    std::f64::consts::TAU * frac
                })
                .collect()
        })
        .collect()
}

/// For each sample phase `q₀`, integrates the detuned original Hamiltonian
/// from the image of `(0, q₀)` and measures its distance from the image of
/// `(0, q₀ + ωt)`.
pub fn torus_residual(
    original: &HamiltonianState,
    result: &NormalFormResult,
    opts: &TorusOptions,
) -> Result<TorusReport, VerifyError> {
    if opts.samples < 1 || !(opts.horizon > 0.0) {
        return Err(VerifyError::InvalidParams(
            "need samples >= 1 and horizon > 0".to_string(),
        ));
    }
    let n = original.n();
    let h = detuned_hamiltonian(original, result);
    let field = HamiltonianField::new(&h, &original.dom);
    let policy = crate::fourier_taylor::TruncationPolicy::default();
    let transform = CanonicalTransform::new(&result.generators, &policy, None)?;
    let phases = sample_phases(n, opts.samples);
    let zero = vec![0.0; n];
    let samples: Vec<SampleDeviation> = phases
        .par_iter()
        .map(|q0| -> Result<SampleDeviation, VerifyError> {
            let (p_start, q_start) = transform.apply(&zero, q0, Direction::Forward)?;
            let traj = integrate_orbit(&field, &p_start, &q_start, opts.horizon, &opts.integrator)?;
            let mut dp_max: f64 = 0.0;
            let mut dq_max: f64 = 0.0;
            for (idx, &t) in traj.times.iter().enumerate() {
                let q_ref: Vec<f64> = (0..n).map(|j| advance_angle(q0[j], result.omega[j], t)).collect();
                let (p_ref, q_img) = transform.apply(&zero, &q_ref, Direction::Forward)?;
                for j in 0..n {
                    dp_max = dp_max.max((traj.p[idx][j] - p_ref[j]).abs());
                    dq_max = dq_max.max(angle_difference(traj.q[idx][j], q_img[j]).abs());
                }
            }
            Ok(SampleDeviation {
                phase: q0.clone(),
                max_deviation: dp_max.max(dq_max),
                max_p_deviation: dp_max,
                max_q_deviation: dq_max,
                energy_drift: traj.energy_drift,
            })
        })
        .collect::<Result<_, _>>()?;
    let max_deviation = samples.iter().map(|s| s.max_deviation).fold(0.0, f64::max);
    let energy_drift = samples.iter().map(|s| s.energy_drift).fold(0.0, f64::max);
    let residual_floor = result.final_residual().max() + result.accumulated_loss;
    let deviation_ratio = if residual_floor > 0.0 {
        max_deviation / (residual_floor * opts.horizon)
    } else {
        f64::INFINITY
    };
    Ok(TorusReport {
        sample_phases: phases,
        horizon: opts.horizon,
        max_deviation,
        energy_drift,
        residual_floor,
        deviation_ratio,
        samples,
    })
}

/// Largest `‖p(t)‖_∞ / (r t)` along an orbit of the normalized Hamiltonian
/// started at `p = 0`, with `r` its normal-form residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionDrift {
    pub residual: f64,
    pub max_action: f64,
    pub max_ratio: f64,
}

pub fn normalized_action_drift(
    result: &NormalFormResult,
    q0: &[f64],
    horizon: f64,
    opts: &IntegratorOptions,
) -> Result<ActionDrift, VerifyError> {
    let state = &result.final_state;
    let field = HamiltonianField::new(&state.hamiltonian(), &state.dom);
    let traj = integrate_orbit(&field, &vec![0.0; state.n()], q0, horizon, opts)?;
    let residual = state.residual().max();
    let mut max_action: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for (t, p) in traj.times.iter().zip(&traj.p) {
        let a = p.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        max_action = max_action.max(a);
        if *t > 0.0 && residual > 0.0 {
            max_ratio = max_ratio.max(a / (residual * t));
        }
    }
    Ok(ActionDrift {
        residual,
        max_action,
        max_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationReport {
    pub max_dp_over_rho: f64,
    pub max_dq_over_sigma: f64,
    /// `Σ_k δ_k^{τ+3}`.
    pub step_pattern: f64,
    /// `8^{-(τ+3)}`.
    pub total_bound: f64,
    pub certified_regime: bool,
    /// Verdict against `step_pattern`, only meaningful in the certified
    /// regime.
    pub pass: Option<bool>,
    pub points: usize,
}

/// Samples the composed map on a grid of the final domain
/// (`grid` actions per axis in `[−ρ_N, ρ_N]`, `4·grid` angles per axis).
pub fn deformation_check(
    result: &NormalFormResult,
    dom: &DomainParams,
    deltas: &[f64],
    tau: f64,
    certified_regime: bool,
    grid: usize,
) -> Result<DeformationReport, VerifyError> {
    let n = result.final_state.n();
    let policy = crate::fourier_taylor::TruncationPolicy::default();
    let transform = CanonicalTransform::new(&result.generators, &policy, None)?;
    let rho_n = result.domains.last().map_or(dom.rho, |d| d.rho);
    let grid = grid.max(1);
    let p_axis: Vec<f64> = if grid == 1 {
        vec![0.0]
    } else {
        (0..grid)
            .map(|i| -rho_n + 2.0 * rho_n * i as f64 / (grid - 1) as f64)
            .collect()
    };
    let q_axis: Vec<f64> = (0..4 * grid)
        .map(|i| std::f64::consts::TAU * i as f64 / (4 * grid) as f64)
        .collect();
    let mut dp: f64 = 0.0;
    let mut dq: f64 = 0.0;
    let mut points = 0;
    let total = (p_axis.len() * q_axis.len()).pow(n as u32);
    for flat in 0..total {
        let mut rest = flat;
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for j in 0..n {
            p[j] = p_axis[rest % p_axis.len()];
            rest /= p_axis.len();
            q[j] = q_axis[rest % q_axis.len()];
            rest /= q_axis.len();
        }
        let (p2, q2) = transform.apply(&p, &q, Direction::Forward)?;
        for j in 0..n {
            dp = dp.max((p2[j] - p[j]).abs() / dom.rho);
            dq = dq.max(angle_difference(q2[j], q[j]).abs() / dom.sigma);
        }
        points += 1;
    }
    let step_pattern = deltas.iter().map(|d| d.powf(tau + 3.0)).fold(0.0, |a, b| a + b);
    let total_bound = 8f64.powf(-(tau + 3.0));
    Ok(DeformationReport {
        max_dp_over_rho: dp,
        max_dq_over_sigma: dq,
        step_pattern,
        total_bound,
        certified_regime,
        pass: certified_regime.then_some(dp.max(dq) <= step_pattern),
        points,
    })
}

/// `‖JᵀΩJ − Ω‖_∞` for the forward map at `(p, q)`, with `J` from central
/// differences of step `h`.
pub fn symplectic_defect(transform: &CanonicalTransform, p: &[f64], q: &[f64], h: f64) -> Result<f64, VerifyError> {
    let n = p.len();
    let dim = 2 * n;
    let image = |x: &[f64]| -> Result<Vec<f64>, VerifyError> {
        let (a, b) = transform.apply(&x[..n], &x[n..], Direction::Forward)?;
        Ok(a.into_iter().chain(b).collect())
    };
    let base: Vec<f64> = p.iter().chain(q).copied().collect();
    let mut jac = vec![vec![0.0; dim]; dim];
    for c in 0..dim {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[c] += h;
        minus[c] -= h;
        let fp = image(&plus)?;
        let fm = image(&minus)?;
        for r in 0..dim {
            let diff = if r >= n {
                angle_difference(fp[r], fm[r])
            } else {
                fp[r] - fm[r]
            };
            jac[r][c] = diff / (2.0 * h);
        }
    }
    // Ω in (p, q) ordering: {q_i, p_i} = 1.
    let omega = |r: usize, c: usize| -> f64 {
        if r < n && c == r + n {
            -1.0
        } else if r >= n && c + n == r {
            1.0
        } else {
            0.0
        }
    };
    let mut worst: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let mut v = 0.0;
            for r in 0..dim {
                for c in 0..dim {
                    v += jac[r][a] * omega(r, c) * jac[c][b];
                }
            }
            worst = worst.max((v - omega(a, b)).abs());
        }
    }
    Ok(worst)
}

/// Symplectic defect at `count` seeded random points with `|p_j| ≤ ρ_N/2`.
pub fn symplecticity_check(result: &NormalFormResult, count: usize, seed: u64) -> Result<f64, VerifyError> {
    let n = result.final_state.n();
    let policy = crate::fourier_taylor::TruncationPolicy::default();
    let transform = CanonicalTransform::new(&result.generators, &policy, Some(&result.domains))?;
    let rho = result.final_state.dom.rho / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-rho..=rho)).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        worst = worst.max(symplectic_defect(
            &transform,
            &p,
            &q,
            crate::tolerances::SYMPLECTIC_FD_STEP,
        )?);
    }
    Ok(worst)
}

/// Largest coordinate error of `forward ∘ inverse` at seeded random points.
pub fn round_trip_error(result: &NormalFormResult, count: usize, seed: u64) -> Result<f64, VerifyError> {
    let n = result.final_state.n();
    let policy = crate::fourier_taylor::TruncationPolicy::default();
    let transform = CanonicalTransform::new(&result.generators, &policy, Some(&result.domains))?;
    let rho = result.final_state.dom.rho / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-rho..=rho)).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let (pi, qi) = transform.apply(&p, &q, Direction::Inverse)?;
        let (pf, qf) = transform.apply(&pi, &qi, Direction::Forward)?;
        for j in 0..n {
            worst = worst.max((pf[j] - p[j]).abs()).max(angle_difference(qf[j], q[j]).abs());
        }
    }
    Ok(worst)
}
