//! JSON run configuration and its resolution against the presets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier_taylor::{DomainParams, FourierTaylor, TruncationPolicy};
use crate::homological::DiophantineFrequency;
use crate::normalizer::RunParams;
use crate::presets::preset;
use crate::verification::{IntegratorOptions, Scheme, TorusOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuterConfig {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Defaults to `1e-14 |ω|`.
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_max_iters() -> usize {
    8
}

impl Default for OuterConfig {
    fn default() -> Self {
        Self {
            max_iters: default_max_iters(),
            tol: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_step_tolerance")]
    pub step_tolerance: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// Actions per axis in the deformation grid.
    #[serde(default = "default_grid")]
    pub deformation_grid: usize,
    /// Random points of the symplecticity and round-trip checks.
    #[serde(default = "default_canonicity_points")]
    pub canonicity_points: usize,
}

fn default_samples() -> usize {
    8
}
fn default_horizon() -> f64 {
    100.0
}
fn default_dt() -> f64 {
    IntegratorOptions::default().dt
}
fn default_scheme() -> Scheme {
    IntegratorOptions::default().scheme
}
fn default_step_tolerance() -> f64 {
    IntegratorOptions::default().tolerance
}
fn default_sample_every() -> usize {
    IntegratorOptions::default().sample_every
}
fn default_grid() -> usize {
    3
}
fn default_canonicity_points() -> usize {
    20
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            horizon: default_horizon(),
            dt: default_dt(),
            scheme: default_scheme(),
            step_tolerance: default_step_tolerance(),
            sample_every: default_sample_every(),
            deformation_grid: default_grid(),
            canonicity_points: default_canonicity_points(),
        }
    }
}

impl VerifyConfig {
    pub fn torus_options(&self) -> TorusOptions {
        TorusOptions {
            samples: self.samples,
            horizon: self.horizon,
            integrator: IntegratorOptions {
                scheme: self.scheme,
                dt: self.dt,
                tolerance: self.step_tolerance,
                sample_every: self.sample_every,
            },
        }
    }
}

/// User-facing configuration. Unset model parameters are taken from the
/// preset; an explicit Hamiltonian must provide all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// A preset name, or a series `{"n": .., "terms": [..]}` holding
    /// everything except the linear part `ω₀·p`.
    pub hamiltonian: serde_json::Value,
    #[serde(default)]
    pub omega: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub sigma0: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Accept `4 < α < 9`, outside the range the convergence proof covers.
    #[serde(default)]
    pub allow_small_alpha: bool,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    #[serde(default)]
    pub outer: OuterConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_steps() -> usize {
    6
}
fn default_alpha() -> f64 {
    9.0
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// A preset run with every other field at its default.
    pub fn for_preset(name: &str) -> Self {
        Self {
            hamiltonian: serde_json::Value::String(name.to_string()),
            omega: None,
            gamma: None,
            tau: None,
            rho0: None,
            sigma0: None,
            epsilon: None,
            steps: default_steps(),
            alpha: default_alpha(),
            allow_small_alpha: false,
            truncation: TruncationPolicy::default(),
            outer: OuterConfig::default(),
            verify: VerifyConfig::default(),
            seed: 0,
        }
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        let (label, series, defaults) = match &self.hamiltonian {
            serde_json::Value::String(name) => {
                let p = preset(name).map_err(|m| invalid("hamiltonian", m))?;
                let eps = self.epsilon.unwrap_or(p.epsilon);
                (p.name.to_string(), p.perturbation(eps), Some(p))
            }
            value @ serde_json::Value::Object(_) => {
                let series: FourierTaylor =
                    serde_json::from_value(value.clone()).map_err(|e| invalid("hamiltonian", e.to_string()))?;
                ("explicit".to_string(), series, None)
            }
            _ => return Err(invalid("hamiltonian", "expected a preset name or a series object")),
        };
        let pick = |field: &str, given: Option<f64>, preset: Option<f64>| -> Result<f64, ConfigError> {
            given
                .or(preset)
                .ok_or_else(|| invalid(field, "required when the hamiltonian is given explicitly"))
        };
        let d = defaults.as_ref();
        let omega = match (&self.omega, d) {
            (Some(w), _) => w.clone(),
            (None, Some(p)) => p.omega.clone(),
            (None, None) => return Err(invalid("omega", "required when the hamiltonian is given explicitly")),
        };
        let resolved = ResolvedConfig {
            hamiltonian_label: label,
            hamiltonian: series,
            omega,
            gamma: pick("gamma", self.gamma, d.map(|p| p.gamma))?,
            tau: pick("tau", self.tau, d.map(|p| p.tau))?,
            rho0: pick("rho0", self.rho0, d.map(|p| p.rho0))?,
            sigma0: pick("sigma0", self.sigma0, d.map(|p| p.sigma0))?,
            epsilon: pick("epsilon", self.epsilon, d.map(|p| p.epsilon))?,
            steps: self.steps,
            alpha: self.alpha,
            alpha_override: self.allow_small_alpha && self.alpha < 9.0,
            truncation: self.truncation,
            outer: self.outer.clone(),
            verify: self.verify.clone(),
            seed: self.seed,
        };
        resolved.validate()?;
        Ok(resolved)
    }
}

/// Configuration with every default materialized; embedded in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub hamiltonian_label: String,
    pub hamiltonian: FourierTaylor,
    pub omega: Vec<f64>,
    pub gamma: f64,
    pub tau: f64,
    pub rho0: f64,
    pub sigma0: f64,
    pub epsilon: f64,
    pub steps: usize,
    pub alpha: f64,
    pub alpha_override: bool,
    pub truncation: TruncationPolicy,
    pub outer: OuterConfig,
    pub verify: VerifyConfig,
    pub seed: u64,
}

impl ResolvedConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive and finite, got {v}")))
            }
        };
        if self.omega.len() != self.hamiltonian.n() {
            return Err(invalid(
                "omega",
                format!(
                    "has length {} but the hamiltonian has {} degrees of freedom",
                    self.omega.len(),
                    self.hamiltonian.n()
                ),
            ));
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(invalid("omega", "entries must be finite"));
        }
        positive("gamma", self.gamma)?;
        positive("rho0", self.rho0)?;
        positive("sigma0", self.sigma0)?;
        if !(self.tau >= 0.0) {
            return Err(invalid("tau", format!("must be non-negative, got {}", self.tau)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid(
                "epsilon",
                format!("must be non-negative, got {}", self.epsilon),
            ));
        }
        if self.steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        if !(self.alpha > 4.0) {
            return Err(invalid("alpha", format!("must exceed 4, got {}", self.alpha)));
        }
        if self.alpha < 9.0 && !self.alpha_override {
            return Err(invalid(
                "alpha",
                format!("{} is below 9; set allow_small_alpha to run anyway", self.alpha),
            ));
        }
        if self.truncation.p_degree < 2 {
            return Err(invalid("truncation.p_degree", "must be at least 2"));
        }
        if self.truncation.fourier_order == 0 {
            return Err(invalid("truncation.fourier_order", "must be at least 1"));
        }
        if self.truncation.lie_order == 0 {
            return Err(invalid("truncation.lie_order", "must be at least 1"));
        }
        if !(self.truncation.tail_tol >= 0.0) {
            return Err(invalid("truncation.tail_tol", "must be non-negative"));
        }
        if !(self.truncation.coeff_floor >= 0.0) {
            return Err(invalid("truncation.coeff_floor", "must be non-negative"));
        }
        if self.outer.max_iters == 0 {
            return Err(invalid("outer.max_iters", "must be at least 1"));
        }
        if self.outer.tol.is_some_and(|t| !(t >= 0.0)) {
            return Err(invalid("outer.tol", "must be non-negative"));
        }
        if self.verify.samples == 0 {
            return Err(invalid("verify.samples", "must be at least 1"));
        }
        positive("verify.horizon", self.verify.horizon)?;
        positive("verify.dt", self.verify.dt)?;
        positive("verify.step_tolerance", self.verify.step_tolerance)?;
        if self.verify.sample_every == 0 {
            return Err(invalid("verify.sample_every", "must be at least 1"));
        }
        Ok(())
    }

    pub fn frequency(&self) -> DiophantineFrequency {
        DiophantineFrequency::new(self.omega.clone(), self.gamma, self.tau)
    }

    pub fn domain(&self) -> DomainParams {
        DomainParams::new(self.rho0, self.sigma0).expect("validated positive")
    }

    pub fn run_params(&self) -> RunParams {
        RunParams {
            steps: self.steps,
            alpha: self.alpha,
            policy: self.truncation,
            max_outer: self.outer.max_iters,
            tol_outer: self.outer.tol,
            ..RunParams::default()
        }
    }
}
