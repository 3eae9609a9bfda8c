//! Monte-Carlo experiment driver.
//!
//! One trial runs the full pipeline on a freshly sampled scenario:
//! placement, power calibration, RB scheduling, fading-averaged link rates,
//! the pricing game, the resulting load split, and the equal-share baseline
//! with the game's mean purchase as its budget.
//!
//! Trials are seeded independently with
//! `trial_seed = mix(mix(mix(master_seed) ^ K) ^ trial_index)` where `mix` is
//! the SplitMix64 finalizer, so a sweep is reproducible bit for bit and may
//! run its trials in parallel.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{ese_budget_from_equilibrium, ese_schedule, BaselineResult};
use crate::channel::{effective_rates, rate_snapshot};
use crate::error::{invalid, Result};
use crate::model::{build_scenario, substream, Scenario, ScenarioConfig, FADING_STREAM, SCHEDULING_STREAM};
use crate::rb_sched::{max_weight, round_robin, Allocation, RbPolicy};
use crate::spg::{solve_equilibrium, Equilibrium, Market, SolverConfig};

/// Everything an experiment needs, read from one flat config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub rb_policy: RbPolicy,
    /// Scheduling passes for MaxWeight. The first uses uniform weights; each
    /// further pass re-weights providers by the data volume the previous
    /// equilibrium assigned them and re-solves the game.
    pub mw_rounds: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            solver: SolverConfig::default(),
            rb_policy: RbPolicy::RoundRobin,
            mw_rounds: 1,
            k_min: 3,
            k_max: 12,
            trials: 500,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` at provider count `k`.
pub fn trial_seed(master_seed: u64, k: usize, index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ k as u64) ^ index as u64)
}

/// Intermediate products of one trial, kept for callers that want more than
/// the summary.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub scenario: Scenario,
    pub policy: RbPolicy,
    pub allocation: Allocation,
    pub market: Market,
    pub equilibrium: Equilibrium,
    pub ese: BaselineResult,
}

/// Schedules RBs, averages rates, and solves the game on a built scenario.
pub fn run_scenario(scenario: Scenario, policy: RbPolicy, config: &ExperimentConfig) -> Result<TrialRun> {
    let k = scenario.n_providers();
    let seed = scenario.rng_seed;
    let draws = scenario.n_fading_draws;
    let rates_for = |alloc: &Allocation| effective_rates(&scenario, alloc, draws, &mut substream(seed, FADING_STREAM));

    let (allocation, market, equilibrium) = match policy {
        RbPolicy::RoundRobin => {
            let allocation = round_robin(scenario.n_rb, k)?;
            let market = Market::from_scenario(&scenario, &rates_for(&allocation)?)?;
            let eq = solve_equilibrium(&market, &config.solver)?;
            (allocation, market, eq)
        }
        RbPolicy::MaxWeight => {
            // the scheduler sees one fading realization of every block
            let snapshot = rate_snapshot(&scenario, &mut substream(seed, SCHEDULING_STREAM));
            let mut allocation = max_weight(&snapshot, &vec![1.0; k])?;
            let mut market = Market::from_scenario(&scenario, &rates_for(&allocation)?)?;
            let mut eq = solve_equilibrium(&market, &config.solver)?;
            for _ in 1..config.mw_rounds.max(1) {
                let weights: Vec<f64> = eq.split.betas.iter().map(|b| b * market.data).collect();
                if weights.iter().all(|&w| w <= 0.0) {
                    break;
                }
                allocation = max_weight(&snapshot, &weights)?;
                market = Market::from_scenario(&scenario, &rates_for(&allocation)?)?;
                eq = solve_equilibrium(&market, &config.solver)?;
            }
            (allocation, market, eq)
        }
    };
    let ese = ese_schedule(&market, ese_budget_from_equilibrium(&equilibrium));
    Ok(TrialRun {
        scenario,
        policy,
        allocation,
        market,
        equilibrium,
        ese,
    })
}

/// Builds the scenario for `seed` (overriding the config's seed) and runs it.
pub fn run_pipeline(config: &ExperimentConfig, seed: u64, policy: RbPolicy) -> Result<TrialRun> {
    let scenario_config = ScenarioConfig {
        rng_seed: seed,
        ..config.scenario.clone()
    };
    run_scenario(build_scenario(&scenario_config)?, policy, config)
}

/// Summary of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub k: usize,
    pub policy: RbPolicy,
    pub local_makespan: f64,
    pub coop_makespan: f64,
    pub saved_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub buyer_utility: f64,
    pub mean_price: f64,
    pub total_amount: f64,
    pub beta0: f64,
    pub ese_budget: f64,
    pub ese_makespan: f64,
    pub ese_saved_ratio: f64,
    /// Largest per-provider balance residual relative to the makespan.
    pub balance_residual: f64,
    pub normalization_error: f64,
}

impl TrialRun {
    pub fn summary(&self) -> TrialResult {
        let eq = &self.equilibrium;
        let split = &eq.split;
        let local = split.local_makespan;
        let balance = split
            .balance_residuals(
                self.market.volume,
                self.market.data,
                self.market.own_capacity,
                &eq.amounts,
                &self.market.rates(),
            )
            .into_iter()
            .flatten()
            .fold(0.0, f64::max);
        let k = eq.amounts.len();
        TrialResult {
            seed: self.scenario.rng_seed,
            k,
            policy: self.policy,
            local_makespan: local,
            coop_makespan: split.makespan,
            saved_ratio: split.saved_ratio(),
            iterations: eq.iterations,
            converged: eq.converged,
            residual: eq.residual,
            buyer_utility: eq.buyer_utility,
            mean_price: eq.prices.iter().sum::<f64>() / k as f64,
            total_amount: eq.amounts.iter().sum(),
            beta0: split.beta0,
            ese_budget: ese_budget_from_equilibrium(eq),
            ese_makespan: self.ese.makespan,
            ese_saved_ratio: self.ese.saved_ratio(local),
            balance_residual: if split.makespan > 0.0 { balance / split.makespan } else { balance },
            normalization_error: split.normalization_error(),
        }
    }
}

/// One trial with the config's scheduler.
pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<TrialResult> {
    Ok(run_pipeline(config, seed, config.rb_policy)?.summary())
}

/// The game's iteration trace for one scenario.
pub fn convergence_trace(config: &ExperimentConfig, seed: u64) -> Result<Equilibrium> {
    Ok(run_pipeline(config, seed, config.rb_policy)?.equilibrium)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    /// Standard error of the mean.
    pub se: f64,
}

impl Stats {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN, se: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std, se: std / n.sqrt() }
    }
}

/// Aggregate of one provider count under one scheduler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub policy: RbPolicy,
    pub trials: usize,
    pub spg: Stats,
    pub ese: Stats,
    pub converged: usize,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub master_seed: u64,
    pub trials_per_k: usize,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub trials: Vec<TrialResult>,
}

impl SweepResult {
    pub fn row(&self, k: usize, policy: RbPolicy) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.k == k && r.policy == policy)
    }
}

/// Runs `trials_per_k` trials at every provider count in `k_range` under both
/// schedulers. Trials sharing `(K, index)` share a seed, so the two schedulers
/// see the same scenarios.
pub fn sweep_rp_count(
    config: &ExperimentConfig,
    k_range: std::ops::RangeInclusive<usize>,
    trials_per_k: usize,
) -> Result<SweepResult> {
    if k_range.is_empty() {
        return Err(invalid("k_range", "must not be empty"));
    }
    if *k_range.start() == 0 {
        return Err(crate::error::Error::EmptyProviderSet);
    }
    if trials_per_k == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let master = config.scenario.rng_seed;
    let policies = [RbPolicy::RoundRobin, RbPolicy::MaxWeight];
    let jobs: Vec<(usize, RbPolicy, usize)> = k_range
        .clone()
        .flat_map(|k| policies.iter().flat_map(move |&p| (0..trials_per_k).map(move |i| (k, p, i))))
        .collect();

    let trials = jobs
        .par_iter()
        .map(|&(k, policy, index)| {
            let mut cfg = config.clone();
            cfg.scenario.n_providers = k;
            Ok(run_pipeline(&cfg, trial_seed(master, k, index), policy)?.summary())
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = trials
        .chunks(trials_per_k)
        .map(|chunk| SweepRow {
            k: chunk[0].k,
            policy: chunk[0].policy,
            trials: chunk.len(),
            spg: Stats::of(chunk.iter().map(|t| t.saved_ratio)),
            ese: Stats::of(chunk.iter().map(|t| t.ese_saved_ratio)),
            converged: chunk.iter().filter(|t| t.converged).count(),
            mean_iterations: chunk.iter().map(|t| t.iterations as f64).sum::<f64>() / chunk.len() as f64,
        })
        .collect();

    Ok(SweepResult {
        master_seed: master,
        trials_per_k,
        rows,
        trials,
    })
}

pub fn write_trials_csv(trials: &[TrialResult], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "k",
        "policy",
        "seed",
        "local_makespan",
        "coop_makespan",
        "saved_ratio",
        "ese_saved_ratio",
        "ese_budget",
        "beta0",
        "mean_price",
        "total_amount",
        "iterations",
        "converged",
        "residual",
    ])?;
    for t in trials {
        w.write_record([
            t.k.to_string(),
            t.policy.name().to_string(),
            t.seed.to_string(),
            t.local_makespan.to_string(),
            t.coop_makespan.to_string(),
            t.saved_ratio.to_string(),
            t.ese_saved_ratio.to_string(),
            t.ese_budget.to_string(),
            t.beta0.to_string(),
            t.mean_price.to_string(),
            t.total_amount.to_string(),
            t.iterations.to_string(),
            t.converged.to_string(),
            t.residual.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "k",
        "policy",
        "trials",
        "spg_mean",
        "spg_std",
        "spg_se",
        "ese_mean",
        "ese_std",
        "ese_se",
        "converged",
        "mean_iterations",
    ])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.policy.name().to_string(),
            r.trials.to_string(),
            r.spg.mean.to_string(),
            r.spg.std.to_string(),
            r.spg.se.to_string(),
            r.ese.mean.to_string(),
            r.ese.std.to_string(),
            r.ese.se.to_string(),
            r.converged.to_string(),
            r.mean_iterations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `aggregate.csv` and `summary.json` into `dir`.
pub fn write_sweep(result: &SweepResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_trials_csv(&result.trials, fs::File::create(dir.join("trials.csv"))?)?;
    write_aggregate_csv(&result.rows, fs::File::create(dir.join("aggregate.csv"))?)?;
    let mut f = fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, result)?;
    writeln!(f)?;
    Ok(())
}
