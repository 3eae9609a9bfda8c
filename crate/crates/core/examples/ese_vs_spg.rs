//! The pricing game against equal-share borrowing and local execution on the
//! same scenarios.

use mgrid::baseline::nonparallel;
use mgrid::harness::{run_pipeline, ExperimentConfig};

fn main() -> mgrid::Result<()> {
    let config = ExperimentConfig::default();
    println!("{:>4} {:>8} {:>8} {:>8} {:>10}", "seed", "local s", "SPG s", "ESE s", "gain");
    let (mut spg, mut ese) = (0.0, 0.0);
    for seed in 0..10 {
        let run = run_pipeline(&config, seed, config.rb_policy)?;
        let local = nonparallel(&run.market).makespan;
        let (a, b) = (run.equilibrium.split.makespan, run.ese.makespan);
        spg += 1.0 - a / local;
        ese += 1.0 - b / local;
        println!("{seed:>4} {local:>8.2} {a:>8.2} {b:>8.2} {:>9.2}%", 100.0 * (b - a) / b);
    }
    println!("mean saved ratio: SPG {:.4}, ESE {:.4}", spg / 10.0, ese / 10.0);
    Ok(())
}
