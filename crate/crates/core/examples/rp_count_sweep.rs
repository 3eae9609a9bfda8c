//! Saved-time ratio as the number of providers grows, under both schedulers.
//! Optional arguments: trials per K (default 100) and an output directory.

use mgrid::harness::{sweep_rp_count, write_sweep, ExperimentConfig};
use mgrid::rb_sched::RbPolicy;

fn main() -> mgrid::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = ExperimentConfig::default();
    let result = sweep_rp_count(&config, 3..=12, trials)?;

    println!("{:>3} {:>16} {:>16} {:>16}", "K", "SPG/RR", "SPG/MW", "ESE/RR");
    for k in 3..=12 {
        let rr = result.row(k, RbPolicy::RoundRobin).unwrap();
        let mw = result.row(k, RbPolicy::MaxWeight).unwrap();
        let cell = |m: f64, se: f64| format!("{m:.4} +- {se:.4}");
        println!("{k:>3} {:>16} {:>16} {:>16}", cell(rr.spg.mean, rr.spg.se), cell(mw.spg.mean, mw.spg.se), cell(rr.ese.mean, rr.ese.se));
    }
    if let Some(dir) = args.next() {
        write_sweep(&result, dir.as_ref())?;
        println!("wrote {dir}/trials.csv, aggregate.csv, summary.json");
    }
    Ok(())
}
