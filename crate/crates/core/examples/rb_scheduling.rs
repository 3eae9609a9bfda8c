//! Round-robin versus MaxWeight on one fading snapshot.

use mgrid::channel::{multi_rp_rate, rate_snapshot};
use mgrid::model::{build_scenario, substream, ScenarioConfig, SCHEDULING_STREAM};
use mgrid::rb_sched::{max_weight, round_robin};

fn main() -> mgrid::Result<()> {
    let scenario = build_scenario(&ScenarioConfig { n_providers: 4, n_rb: 12, ..Default::default() })?;
    let k = scenario.n_providers();
    let snapshot = rate_snapshot(&scenario, &mut substream(scenario.rng_seed, SCHEDULING_STREAM));

    let rr = round_robin(scenario.n_rb, k)?;
    let mw = max_weight(&snapshot, &vec![1.0; k])?;
    // heavier weight on provider 0 pulls blocks towards it
    let skewed = max_weight(&snapshot, &[4.0, 1.0, 1.0, 1.0])?;

    for (name, alloc) in [("round robin", &rr), ("max weight", &mw), ("weighted", &skewed)] {
        let owners: String = alloc.owners().iter().map(|o| o.map_or('.', |j| char::from(b'0' + j as u8))).collect();
        let rates = multi_rp_rate(alloc, &snapshot)?;
        let total: f64 = rates.iter().sum();
        println!("{name:<12} owners {owners}  blocks {:?}  sum rate {:.2} Mb/s", alloc.block_counts(), total / 1e6);
    }
    Ok(())
}
