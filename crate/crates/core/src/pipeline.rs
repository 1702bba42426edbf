//! Batch orchestration: frequency check, constants, normalization,
//! comparison with the schedule, certificates, and the report files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ResolvedConfig};
use crate::error::{NormalizeError, SeriesError, VerifyError};
use crate::estimates::{
    compare_predicted_observed, compute_constants, epsilon_threshold, predicted_schedule, size_constant,
    ComparisonReport, ConstantsLedger, ScheduleParams,
};
use crate::fourier_taylor::FourierTaylor;
use crate::homological::{check_diophantine, DiophantineReport};
use crate::normalizer::{run_normalization, GeneratorPair, HamiltonianState, NormalFormResult};
use crate::output::{sig17, to_json_string};
use crate::tolerances::{
    ENERGY_DRIFT_LIMIT, ROUND_TRIP_LIMIT, SYMPLECTIC_DEFECT_LIMIT, TORUS_ABSOLUTE_FLOOR, TORUS_DEVIATION_FACTOR,
};
use crate::verification::{
    deformation_check, round_trip_error, symplecticity_check, torus_residual, DeformationReport, TorusReport,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{message}")]
    Diophantine {
        message: String,
        report: Box<DiophantineReport>,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateSummary {
    pub theorem_certified: bool,
    pub torus_pass: Option<bool>,
    pub torus_bound: Option<f64>,
    pub energy_drift_pass: Option<bool>,
    pub deformation_pass: Option<bool>,
    pub symplectic_defect: Option<f64>,
    pub round_trip_error: Option<f64>,
    pub canonicity_pass: Option<bool>,
    pub all_passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub timestamp: u64,
    pub config: ResolvedConfig,
    pub diophantine: DiophantineReport,
    pub e0: f64,
    pub constants: ConstantsLedger,
    pub eps_star: f64,
    pub schedule: Option<ScheduleParams>,
    pub schedule_error: Option<String>,
    pub normalization: NormalFormResult,
    pub comparison: Option<ComparisonReport>,
    pub torus: Option<TorusReport>,
    pub deformation: Option<DeformationReport>,
    pub certificates: CertificateSummary,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct GeneratorsFile<'a> {
    omega: &'a [f64],
    omega0: &'a [f64],
    detuning0: &'a [f64],
    generators: &'a [GeneratorPair],
}

/// Runs everything in memory. `verify = false` skips the orbit, deformation
/// and canonicity certificates.
pub fn execute(config: &ResolvedConfig, verify: bool) -> Result<RunReport, PipelineError> {
    let freq = config.frequency();
    let dom = config.domain();
    let policy = config.truncation;

    let diophantine = check_diophantine(&freq, policy.fourier_order);
    if !diophantine.pass {
        return Err(PipelineError::Diophantine {
            message: diophantine.describe_failure(),
            report: Box::new(diophantine),
        });
    }
    log::info!(
        "frequency passes the Diophantine check up to |k| = {}",
        diophantine.horizon
    );

    let full = &FourierTaylor::linear(&config.omega) + &config.hamiltonian;
    let e0 = size_constant(&full, config.epsilon, &dom);
    let constants = compute_constants(e0, freq.n(), &freq, &dom.scaled(0.5));
    let eps_star = epsilon_threshold(&constants, config.alpha, config.tau);
    let (schedule, schedule_error) =
        match predicted_schedule(config.epsilon, config.alpha, &dom, config.steps, &constants) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
    log::info!("E0 = {e0:e}, eps* = {eps_star:e}, eps = {:e}", config.epsilon);

    let initial = HamiltonianState::from_series(freq, &config.hamiltonian, dom, &policy)?;
    let result = run_normalization(&initial, &config.run_params())?;
    log::info!(
        "normalized in {} steps, {} outer passes, final residual {:e}",
        result.steps.len(),
        result.outer_iterations,
        result.final_residual().max()
    );

    let comparison = schedule
        .as_ref()
        .map(|s| compare_predicted_observed(s, &constants, &result));
    let theorem_certified = comparison.as_ref().is_some_and(|c| c.certified);

    let (torus, deformation, symplectic, round_trip) = if verify {
        let opts = config.verify.torus_options();
        let torus = torus_residual(&initial, &result, &opts)?;
        log::info!(
            "torus deviation {:e} against floor {:e}",
            torus.max_deviation,
            torus.residual_floor
        );
        let deltas: Vec<f64> = result.steps.iter().map(|d| d.delta).collect();
        let deformation = deformation_check(
            &result,
            &dom,
            &deltas,
            config.tau,
            theorem_certified,
            config.verify.deformation_grid,
        )?;
        let points = config.verify.canonicity_points;
        let symplectic = symplecticity_check(&result, points, config.seed)?;
        let round_trip = round_trip_error(&result, points, config.seed)?;
        (Some(torus), Some(deformation), Some(symplectic), Some(round_trip))
    } else {
        (None, None, None, None)
    };

    let torus_bound = torus
        .as_ref()
        .map(|t| (TORUS_DEVIATION_FACTOR * t.residual_floor * t.horizon).max(TORUS_ABSOLUTE_FLOOR));
    let torus_pass = torus.as_ref().zip(torus_bound).map(|(t, b)| t.max_deviation <= b);
    let energy_drift_pass = torus.as_ref().map(|t| t.energy_drift <= ENERGY_DRIFT_LIMIT);
    let deformation_pass = deformation.as_ref().and_then(|d| d.pass);
    let canonicity_pass = symplectic
        .zip(round_trip)
        .map(|(s, r)| s <= SYMPLECTIC_DEFECT_LIMIT && r <= ROUND_TRIP_LIMIT);
    let all_passed = theorem_certified
        && [torus_pass, energy_drift_pass, deformation_pass, canonicity_pass]
            .iter()
            .all(|v| v.unwrap_or(true));
    let certificates = CertificateSummary {
        theorem_certified,
        torus_pass,
        torus_bound,
        energy_drift_pass,
        deformation_pass,
        symplectic_defect: symplectic,
        round_trip_error: round_trip,
        canonicity_pass,
        all_passed,
    };

    Ok(RunReport {
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        config: config.clone(),
        diophantine,
        e0,
        constants,
        eps_star,
        schedule,
        schedule_error,
        normalization: result,
        comparison,
        torus,
        deformation,
        certificates,
        exit_code: if all_passed { 0 } else { 2 },
    })
}

/// `residuals.csv` contents; falls back to `ε^{k+1}` predictions when the
/// schedule itself is invalid.
pub fn residuals_csv(report: &RunReport) -> String {
    if let Some(c) = &report.comparison {
        return c.to_csv();
    }
    let r = &report.normalization;
    let eps = report.config.epsilon;
    let mut out = String::from("step,residual_h0,residual_h1,detuning_increment_norm,predicted_eps_k,trunc_loss\n");
    let _ = writeln!(
        out,
        "0,{},{},{},{},{}",
        sig17(r.initial_residual.norm_h0),
        sig17(r.initial_residual.norm_h1_offavg),
        sig17(0.0),
        sig17(eps),
        sig17(0.0)
    );
    for d in &r.steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            d.step,
            sig17(d.residual_out.norm_h0),
            sig17(d.residual_out.norm_h1_offavg),
            sig17(d.detuning_increment_norm),
            sig17(eps.powi(d.step as i32 + 1)),
            sig17(d.trunc_loss)
        );
    }
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), PipelineError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn json<T: Serialize>(value: &T) -> String {
    to_json_string(value).expect("report types serialize")
}

/// Writes `report.json`, `residuals.csv`, `generators.json` and, when the
/// torus was checked, `torus.json`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    write_file(dir, "report.json", &json(report))?;
    write_file(dir, "residuals.csv", &residuals_csv(report))?;
    let r = &report.normalization;
    let generators = GeneratorsFile {
        omega: &r.omega,
        omega0: &r.omega0,
        detuning0: &r.detuning0,
        generators: &r.generators,
    };
    write_file(dir, "generators.json", &json(&generators))?;
    if let Some(t) = &report.torus {
        write_file(dir, "torus.json", &json(t))?;
    }
    Ok(())
}

/// Runs `config` and writes its files into `dir`. The returned report's
/// `exit_code` is 0 or 2; errors map to 1.
pub fn run(config: &ResolvedConfig, dir: &Path, verify: bool) -> Result<RunReport, PipelineError> {
    let report = execute(config, verify)?;
    write_outputs(&report, dir)?;
    Ok(report)
}
