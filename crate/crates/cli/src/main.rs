use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alpmp_core::scenarios::{
    audit_candidate, builtin_config, list_scenarios, run_scenario, RunReport, Scenario, ScenarioConfig, Z0Mode,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Extremals of the generalized maximum principle on almost Lie algebroids.
#[derive(Parser)]
#[command(name = "alpmp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory, costate, audit and report files.
    Run {
        /// Config file, or the name of a built-in scenario.
        config: String,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Audit a trajectory and costate against a scenario's control system.
    Audit {
        config: String,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        costate: PathBuf,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Check the algebroid axioms of a scenario's chart.
    Validate {
        config: String,
        #[command(flatten)]
        opts: Overrides,
    },
    /// List the built-in scenarios.
    ListScenarios,
}

#[derive(Args, Clone, Debug, Default)]
struct Overrides {
    /// Integration step.
    #[arg(long)]
    step: Option<f64>,
    /// Audit tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for sampled checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Cost multiplier: normal (z0 = -1) or abnormal (z0 = 0).
    #[arg(long, value_enum)]
    z0: Option<Z0Arg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Z0Arg {
    Normal,
    Abnormal,
}

fn load(config: &str, opts: &Overrides) -> Result<ScenarioConfig> {
    let path = Path::new(config);
    let mut cfg = if path.is_file() {
        ScenarioConfig::load(path).with_context(|| format!("reading {}", path.display()))?
    } else if let Some(cfg) = builtin_config(config) {
        cfg
    } else {
        bail!("`{config}` is neither a config file nor a built-in scenario (see `alpmp list-scenarios`)");
    };
    cfg.solver.step = opts.step.or(cfg.solver.step);
    cfg.solver.tol = opts.tol.or(cfg.solver.tol);
    cfg.solver.seed = opts.seed.or(cfg.solver.seed);
    if let Some(z0) = opts.z0 {
        cfg.z0 = Some(match z0 {
            Z0Arg::Normal => Z0Mode::Normal,
            Z0Arg::Abnormal => Z0Mode::Abnormal,
        });
    }
    Ok(cfg)
}

fn print_report(report: &RunReport, out: &Path) {
    println!(
        "scenario {} ({}), chart {}",
        report.scenario,
        format!("{:?}", report.pipeline).to_lowercase(),
        report.chart
    );
    if !report.switches.is_empty() {
        println!("switches: {}", report.switches.len());
    }
    for c in &report.checks {
        println!(
            "  {:<5} {:<28} {:>12.3e}  (tol {:.1e})",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    for n in &report.notes {
        println!("  note: {n}");
    }
    println!("artifacts in {}", out.display());
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
}

fn verdict(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, opts } => {
            let cfg = load(&config, &opts)?;
            let outcome = run_scenario(&cfg)?;
            outcome.write_artifacts(&opts.out)?;
            print_report(&outcome.report, &opts.out);
            Ok(verdict(outcome.report.pass))
        }
        Command::Audit {
            config,
            traj,
            costate,
            opts,
        } => {
            let cfg = load(&config, &opts)?;
            let outcome = audit_candidate(&cfg, &traj, &costate)?;
            std::fs::create_dir_all(&opts.out)?;
            std::fs::write(opts.out.join("audit.json"), outcome.audit.to_json()?)?;
            std::fs::write(opts.out.join("report.json"), outcome.report.to_json()?)?;
            print_report(&outcome.report, &opts.out);
            Ok(verdict(outcome.report.pass))
        }
        Command::Validate { config, opts } => {
            let cfg = load(&config, &opts)?;
            let reports = Scenario::from_config(&cfg)?.validate_axioms()?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(verdict(reports.iter().all(|r| r.pass)))
        }
        Command::ListScenarios => {
            for s in list_scenarios() {
                println!("{:<16} {}", s.name, s.description);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
