use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phasefield_bench::{run_experiment, BenchError, RunConfig, SolverChoice};

#[derive(Parser)]
#[command(name = "phasefield-bench", about = "Quasi-static phase-field fracture benchmark driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the load ramp described by a config file.
    Run {
        /// TOML file; missing keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        solver: Option<SolverChoice>,
        #[arg(long)]
        refine: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        warm_start_displacement: bool,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<bool, BenchError> {
    let Command::Run { config, solver, refine, steps, out, warm_start_displacement, tol } = Cli::parse().command;
    let mut cfg = match config {
        Some(path) => RunConfig::from_file(&path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = solver {
        cfg.solver = s;
    }
    if let Some(r) = refine {
        cfg.refine_steps = r;
    }
    if let Some(k) = steps {
        cfg.steps = k;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    if warm_start_displacement {
        cfg.warm_start_displacement = true;
    }
    if let Some(t) = tol {
        cfg.tolerance = t;
    }
    let summary = run_experiment(&cfg)?;
    let failed = summary.records.iter().filter(|r| r.status != phasefield_bench::StepStatus::Converged).count();
    let total: f64 = summary.records.iter().map(|r| r.walltime_s).sum();
    println!(
        "{} steps, {failed} not converged, solver time {total:.1} s, rupture step {}",
        summary.records.len(),
        summary.rupture_step().map_or("none".to_string(), |s| s.to_string())
    );
    Ok(failed == 0)
}
