//! `ropex` — experiment runner for the bilevel VI solver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ropex_cli::{run_experiment, CliError, ExperimentConfig, ProblemId};
use ropex_core::{
    build_schedule, theoretical_bounds, validate_conditions, ConditionStatus, PolicyKind,
};

/// Environment variable supplying the default output directory.
const OUT_ENV: &str = "ROPEX_OUT";

#[derive(Parser)]
#[command(name = "ropex")]
#[command(about = "Benchmark harness for regularized operator-extrapolation on bilevel VIs")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Run a configured experiment: replicated runs, CSV artifacts, summary
    Run {
        /// Path to a key = value configuration file
        #[arg(long)]
        config: PathBuf,
        /// Override the horizon sweep, e.g. 256,1024,4096
        #[arg(long)]
        k_sweep: Option<String>,
        /// Override the replication count
        #[arg(long)]
        reps: Option<usize>,
        /// Override the base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (falls back to the config, then $ROPEX_OUT)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for replications (0 = automatic)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Build a schedule and report every validity condition
    ValidateSchedule {
        #[arg(long)]
        policy: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        problem: String,
    },
    /// Evaluate the closed-form rate certificates for a policy at a horizon
    Bounds {
        #[arg(long)]
        policy: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        problem: String,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch() -> Result<(), CliError> {
    match Cli::parse().command {
        Commands::Run {
            config,
            k_sweep,
            reps,
            seed,
            out,
            workers,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(sweep) = k_sweep {
                cfg.k_sweep = sweep
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::Config("bad --k-sweep list".into()))?;
            }
            if let Some(r) = reps {
                cfg.replications = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = Some(o);
            }
            if cfg.out_dir.is_none() {
                cfg.out_dir = std::env::var_os(OUT_ENV)
                    .map(PathBuf::from)
                    .or_else(|| Some(PathBuf::from("ropex-out")));
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let report = run_experiment(&cfg)?;
            print!("{}", report.render(cfg.timing));
            println!("wall_seconds = {:.3}", report.total_wall_seconds);
            if let Some(dir) = &report.out_dir {
                println!("artifacts written to {}", dir.display());
            }
            Ok(())
        }
        Commands::ValidateSchedule { policy, k, problem } => {
            let (policy, problem) = parse_pair(&policy, &problem)?;
            let instance = ExperimentConfig::new(problem, policy, k).build_problem()?;
            let d_x = instance.set.require_radius()?;
            let schedule = build_schedule(policy, &instance.constants, d_x, k, None)?;
            let report = validate_conditions(policy, &schedule.rows, &instance.constants);
            for cond in &report.conditions {
                let status = match cond.status {
                    ConditionStatus::Satisfied => "satisfied".to_string(),
                    ConditionStatus::SatisfiedFrom(k) => format!("satisfied from k = {k}"),
                    ConditionStatus::BeyondHorizon { min_admissible } => {
                        format!("needs horizon >= {min_admissible}")
                    }
                    ConditionStatus::Violated { first } => format!("VIOLATED at k = {first}"),
                };
                println!(
                    "{:<45} {:<25} max_residual = {:.2e}",
                    cond.id.name(),
                    status,
                    cond.max_equality_residual
                );
            }
            if let Some(min) = report.min_admissible_horizon {
                println!("minimal admissible horizon: {min}");
            }
            if report.passed {
                println!("schedule ok: policy {policy}, horizon {k}");
                Ok(())
            } else {
                Err(CliError::Schedule(format!(
                    "policy {policy} fails its conditions at horizon {k}"
                )))
            }
        }
        Commands::Bounds { policy, k, problem } => {
            let (policy, problem) = parse_pair(&policy, &problem)?;
            let instance = ExperimentConfig::new(problem, policy, k).build_problem()?;
            let d_x = instance.set.require_radius()?;
            let c_h = instance
                .constants
                .require_c_h(policy)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let d_inner = instance
                .references
                .inner_solution_set
                .as_ref()
                .and_then(|s| s.radius());
            let report = theoretical_bounds(policy, &instance.constants, d_x, c_h, d_inner, k)?;
            println!("policy = {policy}, horizon = {k}");
            for (name, value) in report.fields() {
                println!("{name} = {value:.6e}");
            }
            Ok(())
        }
    }
}

fn parse_pair(policy: &str, problem: &str) -> Result<(PolicyKind, ProblemId), CliError> {
    let policy = PolicyKind::parse(policy).map_err(|e| CliError::Config(e.to_string()))?;
    let problem = ProblemId::parse(problem)?;
    Ok((policy, problem))
}
