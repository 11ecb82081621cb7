//! `slicelab` command-line runner.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::bounds::BoundsCmd;
use config::{split_top_level, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "slicelab", version = output::version(), about = "Slice sampler experiments and bound evaluation")]
struct Cli {
    /// Master seed; every chain and test-function set derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV output.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// `key = value` file with [target], [kernel] and [run] sections; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run chains and write samples.csv.
    Sample(RunArgs),
    /// Compare kernels against the first one; writes forms.csv, spectrum.csv and wpi_check.csv.
    Compare(RunArgs),
    /// Spectral gaps and eigenvalues of one-dimensional kernels.
    Spectrum(RunArgs),
    /// Tabulate a beta function and its convergence rate alpha; writes beta.csv and alpha.csv.
    Wpi(WpiArgs),
    /// Evaluate closed-form bounds.
    Bounds {
        #[command(subcommand)]
        which: BoundsCmd,
    },
    /// Run the acceptance checks.
    Verify {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    target: Option<String>,
    /// Kernel spec, or a comma-separated list for compare and spectrum.
    #[arg(long, alias = "kernels")]
    kernel: Option<String>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Monte Carlo pairs per Dirichlet form when no matrix form exists.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    x_max: Option<f64>,
    /// s values: a comma list, `a..b`, or `log(lo,hi,k)`.
    #[arg(long = "s")]
    s_grid: Option<String>,
}

#[derive(Debug, Args)]
struct WpiArgs {
    /// `power(c0,c1)`, `gap(gamma)`, `im_exp(lambda)` or `quadquartic(d)`, optionally `capped(...)`.
    #[arg(long)]
    beta: Option<String>,
    /// s values: a comma list, `a..b`, or `log(lo,hi,k)`.
    #[arg(long = "s")]
    s_grid: Option<String>,
    /// n values in the same grammar.
    #[arg(long = "n")]
    n_grid: Option<String>,
}

impl RunArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(t) = &self.target {
            cfg.target = Some(t.clone());
        }
        if let Some(k) = &self.kernel {
            cfg.kernels = split_top_level(k);
        }
        set(&mut cfg.chains, self.chains);
        set(&mut cfg.steps, self.steps);
        set(&mut cfg.burn_in, self.burn_in);
        set(&mut cfg.thin, self.thin);
        set(&mut cfg.samples, self.samples);
        set(&mut cfg.grid_n, self.grid_n);
        if self.x_max.is_some() {
            cfg.x_max = self.x_max;
        }
        set(&mut cfg.s_grid, self.s_grid.clone());
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.out, cli.out.clone());
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    match &cli.command {
        Command::Sample(a) | Command::Compare(a) | Command::Spectrum(a) => a.apply(&mut cfg),
        Command::Wpi(a) => {
            if a.beta.is_some() {
                cfg.beta = a.beta.clone();
            }
            set(&mut cfg.s_grid, a.s_grid.clone());
            set(&mut cfg.n_grid, a.n_grid.clone());
        }
        _ => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> commands::CmdResult {
    let cfg = config(cli)?;
    if let Some(n) = cfg.workers {
        if n == 0 {
            return Err("--workers must be positive".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    match &cli.command {
        Command::Sample(_) => commands::sample::run(&cfg),
        Command::Compare(_) => commands::compare::run_compare(&cfg),
        Command::Spectrum(_) => commands::compare::run_spectrum(&cfg),
        Command::Wpi(_) => commands::wpi::run(&cfg),
        Command::Bounds { which } => commands::bounds::run(which, &cfg),
        Command::Verify { only } => commands::verify::run(&cfg, only),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) if outcome.failures.is_empty() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
