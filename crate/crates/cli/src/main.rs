use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kamknob::homological::check_diophantine;
use kamknob::output::to_json_string;
use kamknob::pipeline::{self, PipelineError};
use kamknob::presets::{preset, PRESET_NAMES};
use kamknob::{ResolvedConfig, RunConfig};

#[derive(Parser)]
#[command(name = "kamknob", version, about = "Kolmogorov normal form with frequency detuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize, compare with the convergence schedule, certify the torus.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skip the orbit, deformation and canonicity certificates.
        #[arg(long)]
        no_verify: bool,
        #[arg(short, long)]
        verbose: bool,
    },
    /// List the built-in Hamiltonians.
    Presets,
    /// Check the Diophantine condition of the configured frequency.
    CheckFreq {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ResolvedConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let config = RunConfig::from_json_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    config.resolve().map_err(|e| format!("{}: {e}", path.display()))
}

fn run(config: &Path, out: &Path, verify: bool) -> ExitCode {
    let resolved = match load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pipeline::run(&resolved, out, verify) {
        Ok(report) => {
            let r = &report.normalization;
            println!("omega0      {:?}", r.omega0);
            println!("detuning0   {:?}", r.detuning0);
            println!("residuals   {:?}", r.residual_sequence());
            println!(
                "outer       {} passes, converged = {}",
                r.outer_iterations, r.outer_converged
            );
            println!("eps / eps*  {:e} / {:e}", resolved.epsilon, report.eps_star);
            if let Some(t) = &report.torus {
                println!(
                    "torus       max deviation {:e}, floor {:e}, energy drift {:e}",
                    t.max_deviation, t.residual_floor, t.energy_drift
                );
            }
            let c = &report.certificates;
            if c.all_passed {
                println!("certified");
            } else if c.theorem_certified {
                println!("theorem hypotheses hold but a numerical certificate failed");
            } else {
                println!("empirical: theorem hypotheses not verified");
            }
            println!("reports written to {}", out.display());
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let PipelineError::Diophantine { report, .. } = &e {
                eprintln!(
                    "smallest divisor {:e} at k = {:?}; run check-freq for the per-order table",
                    report.worst_divisor, report.worst_k
                );
            }
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = matches!(cli.command, Command::Run { verbose: true, .. });
    env_logger::Builder::new()
        .filter_level(if verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    match cli.command {
        Command::Run {
            config, out, no_verify, ..
        } => run(&config, &out, !no_verify),
        Command::Presets => {
            for name in PRESET_NAMES {
                let p = preset(name).expect("listed preset exists");
                println!("{:<16} n = {}  omega = {:?}  {}", p.name, p.n, p.omega, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::CheckFreq { config } => {
            let resolved = match load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let report = check_diophantine(&resolved.frequency(), resolved.truncation.fourier_order);
            print!("{}", to_json_string(&report).expect("report serializes"));
            if report.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", report.describe_failure());
                ExitCode::from(1)
            }
        }
    }
}
