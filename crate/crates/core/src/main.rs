use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mgrid::harness::{self, ExperimentConfig};
use mgrid::model::load_config;
use mgrid::rb_sched::RbPolicy;
use mgrid::spg::Equilibrium;

#[derive(Parser)]
#[command(name = "mgrid", version, about = "Stackelberg-priced load scheduling for mobile grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the equilibrium as JSON.
    Solve(CommonArgs),
    /// Emit the per-iteration price/amount trace of one scenario as CSV.
    Trace(CommonArgs),
    /// Sweep the provider count and write per-trial and aggregate results.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Inclusive provider-count range, e.g. 3..12.
        #[arg(long, value_parser = parse_range)]
        k_range: Option<(usize, usize)>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// JSON or TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rb_policy: Option<RbPolicy>,
    /// Number of providers (solve and trace).
    #[arg(long)]
    providers: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output directory; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim_start_matches('=').trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

impl CommonArgs {
    fn config(&self) -> mgrid::Result<ExperimentConfig> {
        let mut config: ExperimentConfig = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.scenario.rng_seed = seed;
        }
        if let Some(policy) = self.rb_policy {
            config.rb_policy = policy;
        }
        if let Some(k) = self.providers {
            config.scenario.n_providers = k;
        }
        if let Some(tol) = self.tol {
            config.solver.tol = tol;
        }
        if let Some(n) = self.max_iter {
            config.solver.max_iter = n;
        }
        Ok(config)
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    seed: u64,
    rb_policy: RbPolicy,
    distances: Vec<f64>,
    block_counts: Vec<usize>,
    rates: Vec<f64>,
    equilibrium: &'a Equilibrium,
    ese_saved_ratio: f64,
    saved_ratio: f64,
}

fn emit(out: Option<&Path>, file: &str, bytes: &[u8]) -> mgrid::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), bytes)?;
        }
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn run(cli: Cli) -> mgrid::Result<()> {
    match cli.command {
        Command::Solve(args) => {
            let config = args.config()?;
            let seed = config.scenario.rng_seed;
            let run = harness::run_pipeline(&config, seed, config.rb_policy)?;
            let local = run.equilibrium.split.local_makespan;
            let output = SolveOutput {
                seed,
                rb_policy: run.policy,
                distances: run.scenario.providers.iter().map(|p| p.distance_to_ap).collect(),
                block_counts: run.allocation.block_counts(),
                rates: run.market.rates(),
                equilibrium: &run.equilibrium,
                ese_saved_ratio: run.ese.saved_ratio(local),
                saved_ratio: run.equilibrium.split.saved_ratio(),
            };
            let mut json = serde_json::to_vec_pretty(&output)?;
            json.push(b'\n');
            emit(args.out.as_deref(), "equilibrium.json", &json)
        }
        Command::Trace(args) => {
            let config = args.config()?;
            let eq = harness::convergence_trace(&config, config.scenario.rng_seed)?;
            let mut buf = Vec::new();
            eq.write_trace_csv(&mut buf)?;
            emit(args.out.as_deref(), "trace.csv", &buf)
        }
        Command::Sweep { common, k_range, trials } => {
            let mut config = common.config()?;
            if let Some((a, b)) = k_range {
                config.k_min = a;
                config.k_max = b;
            }
            if let Some(n) = trials {
                config.trials = n;
            }
            let result = harness::sweep_rp_count(&config, config.k_min..=config.k_max, config.trials)?;
            match common.out.as_deref() {
                Some(dir) => harness::write_sweep(&result, dir),
                None => harness::write_aggregate_csv(&result.rows, io::stdout()),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
