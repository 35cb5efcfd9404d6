use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polypass::commands::{cmd_sweep, run_command, CliError};
use polypass::RunConfig;

const AFTER_HELP: &str = "\
Outputs (one directory per run, every file starts with a
`# polypass <version> config-sha256 <hash>` comment line):
  solution.csv   x[,y],u            node values of the solution
  coeffs.csv     k1[,k2],coeff      sine coefficients
  trace.csv      iteration,path_max_energy,energy,grad_norm,sol_norm,
                 defect,f_norm,cerami   one row per iteration
  pairs.csv      pair,energy,residual,full_residual,sup_norm,sign_changes
  stages.csv     stage,s_n,sup_norm,stopped,energy,residual,iterations,converged
  blowup.csv     stage,lambda,beta1,q0,coeff
  chain.csv      k,p_k,p_k_star
  report.csv     hypothesis,verdict,witnesses
  summary.csv    job,modes,law,exit_code,message
  meta.json / report.json   run metadata with the full diagnostic series

Exit codes: 0 ok, 1 io error, 2 config error, 3 no valley endpoint,
4 iteration limit, 5 continuation did not stop, 6 fewer pairs than requested.";

#[derive(Parser)]
#[command(name = "polypass", version, about = "Mountain-pass solver for polyharmonic Navier problems", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "polypass-out")]
    out: PathBuf,
    /// Gradient-norm tolerance, overrides [solve] tol.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap, overrides [solve] max_iter.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Modes per dimension, overrides [problem] modes.
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Seed for random directions, overrides [run] seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the effective configuration with all defaults and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the hypotheses on samples and write report.json.
    Check,
    /// Mountain pass from the valley endpoint.
    Solve,
    /// Several solution pairs of an odd nonlinearity.
    Multi,
    /// Truncation-continuation along the schedule.
    Truncate,
    /// L^p bootstrap exponent chain.
    Bootstrap,
    /// Fan the [sweep] grid out over worker threads.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Multi => "multi",
            Command::Truncate => "truncate",
            Command::Bootstrap => "bootstrap",
            Command::Sweep => "sweep",
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p),
        None => RunConfig::parse(""),
    }
    .map_err(CliError::Config)?;
    if let Some(t) = cli.tol {
        cfg.solve.tol = t;
    }
    if let Some(n) = cli.max_iter {
        cfg.solve.max_iter = n;
    }
    if let Some(md) = cli.modes {
        cfg.problem.modes = md;
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        if cli.print_config {
            print!("{}", cfg.to_toml());
            return Ok(());
        }
        match cli.command {
            Command::Sweep => cmd_sweep(&cfg, &cli.out),
            c => run_command(c.name(), &cfg, &cli.out),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polypass {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
