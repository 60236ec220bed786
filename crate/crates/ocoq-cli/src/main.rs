//! `ocoq` command line: run solvers, verify traces against the
//! theoretical envelopes, estimate expected-value bounds by Monte Carlo,
//! sweep accuracy targets, and query the hindsight oracles.
//!
//! Exit codes: 0 all checks pass, 1 a verification check failed,
//! 2 configuration error, 3 numerical error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ocoq_cli::config;
use ocoq_cli::error::{HarnessError, Result};
use ocoq_cli::mc::{monte_carlo, McOptions};
use ocoq_cli::report::VerificationReport;
use ocoq_cli::run::execute;
use ocoq_cli::sweep::{sweep, to_csv};
use ocoq_cli::trace::RunTrace;
use ocoq_cli::verify::{parse_selectors, validate_declared_constants, verify};

#[derive(Parser)]
#[command(
    name = "ocoq",
    version,
    about = "online convex optimization with time-varying constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured run and persist its trace.
    Run {
        config: PathBuf,
        /// Trace output path; defaults to the config stem with `.trace.jsonl`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also validate the declared constants on this many samples.
        #[arg(long)]
        validate_samples: Option<u64>,
    },
    /// Check a persisted trace against the selected envelopes.
    Verify {
        trace: PathBuf,
        /// Comma-separated: t1,t2,t3,lemmas,doubling,zinkevich or all.
        #[arg(long)]
        theorems: String,
        /// Write the report as JSON to this path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Monte Carlo verification of the expected-value envelopes.
    Mc {
        config: PathBuf,
        #[arg(long)]
        trials: u64,
        /// Draws for the expected-value oracle.
        #[arg(long, default_value_t = 100_000)]
        mc_slots: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run one configuration per target accuracy and tabulate convergence.
    Sweep {
        config: PathBuf,
        /// Comma-separated accuracy targets, e.g. 0.2,0.1,0.05.
        #[arg(long)]
        eps: String,
        /// CSV output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best fixed decision in hindsight for the configured scenario.
    Oracle {
        config: PathBuf,
        /// Draws for expected-value estimation on stochastic families.
        #[arg(long, default_value_t = 100_000)]
        mc_slots: u64,
    },
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|source| HarnessError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn report_exit(report: &VerificationReport, path: Option<&Path>) -> Result<ExitCode> {
    eprint!("{}", report.summary());
    write_or_print(path, &report.to_json())?;
    if path.is_none() {
        println!();
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main_inner() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config: config_path,
            out,
            validate_samples,
        } => {
            let built = config::build_from_path(&config_path)?;
            let trace = execute(&built)?;
            let out = out.unwrap_or_else(|| {
                let stem = config_path
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy();
                PathBuf::from(format!("{stem}.trace.jsonl"))
            });
            trace.save(&out)?;
            eprintln!(
                "wrote {} slots to {} (digest {})",
                trace.horizon(),
                out.display(),
                trace.meta.config_digest
            );
            if let Some(samples) = validate_samples {
                let report = validate_declared_constants(&trace, samples)?;
                eprintln!(
                    "constants over {} samples: max |value| {:.6} (F flag {}), max subgradient {:.6} (G flag {}), slater flag {}",
                    report.samples,
                    report.max_abs_value,
                    report.value_flag,
                    report.max_subgradient_norm,
                    report.subgradient_flag,
                    report.slater_flag,
                );
                if report.value_flag || report.subgradient_flag || report.slater_flag {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            trace,
            theorems,
            report,
        } => {
            let selectors = parse_selectors(&theorems)?;
            let loaded = RunTrace::load(&trace)?;
            let result = verify(&loaded, &selectors)?;
            report_exit(&result, report.as_deref())
        }
        Command::Mc {
            config: config_path,
            trials,
            mc_slots,
            report,
        } => {
            let built = config::build_from_path(&config_path)?;
            let result = monte_carlo(&built, &McOptions { trials, mc_slots })?;
            report_exit(&result, report.as_deref())
        }
        Command::Sweep {
            config: config_path,
            eps,
            out,
        } => {
            let epsilons = eps
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| HarnessError::Config(format!("eps: bad value {s}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let built = config::build_from_path(&config_path)?;
            let rows = sweep(&built, &epsilons)?;
            write_or_print(out.as_deref(), &to_csv(&rows))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle {
            config: config_path,
            mc_slots,
        } => {
            let built = config::build_from_path(&config_path)?;
            let stochastic = matches!(
                built.spec.family,
                ocoq_core::streams::ScenarioFamily::Model1Iid { .. }
                    | ocoq_core::streams::ScenarioFamily::Model2Iid { .. }
            );
            let solution = if stochastic {
                ocoq_core::oracle::best_fixed_expected(&built.spec, &built.set, mc_slots)
            } else {
                ocoq_core::oracle::best_fixed_common_subset(
                    &built.spec,
                    &built.set,
                    built.config.horizon,
                )
            };
            match solution {
                Ok(sol) => {
                    let json = serde_json::json!({
                        "x_star": sol.x_star,
                        "objective_avg": sol.objective_avg,
                        "feasibility_residual": sol.feasibility_residual,
                        "method": match sol.method {
                            ocoq_core::oracle::OracleMethod::Grid => "grid",
                            ocoq_core::oracle::OracleMethod::OfflineSubgradient => "offline-subgradient",
                        },
                        "tolerance": sol.tolerance,
                        "f_star": sol.f_star,
                    });
                    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
                    Ok(ExitCode::SUCCESS)
                }
                Err(ocoq_core::Error::Infeasible { residual }) => {
                    let json = serde_json::json!({ "infeasible": true, "residual": residual });
                    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
