//! Built-in model Hamiltonians with suggested parameters.

use crate::fourier_taylor::FourierTaylor;

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub n: usize,
    pub omega: Vec<f64>,
    pub gamma: f64,
    pub tau: f64,
    pub rho0: f64,
    pub sigma0: f64,
    pub epsilon: f64,
}

pub const PRESET_NAMES: [&str; 3] = ["pendulum", "two_dof_golden", "forced_pendulum"];

pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

impl Preset {
    /// Everything except the linear part `ω₀·p`.
    pub fn perturbation(&self, eps: f64) -> FourierTaylor {
        match self.name {
            "pendulum" => &FourierTaylor::p_monomial(1, &[2], 0.5) + &FourierTaylor::cos(&[1], eps),
            "two_dof_golden" => {
                let kinetic = &FourierTaylor::p_monomial(2, &[2, 0], 0.5) + &FourierTaylor::p_monomial(2, &[0, 2], 0.5);
                let potential = &FourierTaylor::cos(&[1, 0], eps) + &FourierTaylor::cos(&[1, -1], eps);
                &kinetic + &potential
            }
            "forced_pendulum" => &FourierTaylor::p_monomial(2, &[2, 0], 0.5) + &FourierTaylor::cos(&[1, -1], eps),
            other => unreachable!("preset table out of sync: {other}"),
        }
    }
}

/// Looks a preset up by name; the error lists the known names.
pub fn preset(name: &str) -> Result<Preset, String> {
    let g = golden_mean();
    let p = match name {
        "pendulum" => Preset {
            name: "pendulum",
            description: "H = omega p + p^2/2 + eps cos q",
            n: 1,
            omega: vec![1.0],
            gamma: 0.5,
            tau: 0.0,
            rho0: 0.1,
            sigma0: 0.5,
            epsilon: 1e-3,
        },
        "two_dof_golden" => Preset {
            name: "two_dof_golden",
            description: "H = omega.p + (p1^2 + p2^2)/2 + eps (cos q1 + cos(q1 - q2))",
            n: 2,
            omega: vec![1.0, g],
            gamma: 0.3,
            tau: 1.0,
            rho0: 0.1,
            sigma0: 0.5,
            epsilon: 1e-3,
        },
        "forced_pendulum" => Preset {
            name: "forced_pendulum",
            description: "H = omega.p + p1^2/2 + eps cos(q1 - q2), p2 conjugate to the forcing clock",
            n: 2,
            omega: vec![1.0, g],
            gamma: 0.3,
            tau: 1.0,
            rho0: 0.1,
            sigma0: 0.5,
            epsilon: 1e-3,
        },
        other => {
            return Err(format!(
                "unknown preset \"{other}\"; available presets: {}",
                PRESET_NAMES.join(", ")
            ))
        }
    };
    Ok(p)
}
