//! Link budget of a sampled scenario: calibrated power, mean SNR per
//! provider, and fading-averaged rates under Shannon and an MCS table.

use mgrid::channel::{effective_rates, mean_snr, McsTable};
use mgrid::model::{build_scenario, substream, RateModel, ScenarioConfig, FADING_STREAM};
use mgrid::rb_sched::round_robin;

fn main() -> mgrid::Result<()> {
    let config = ScenarioConfig::default();
    let mut scenario = build_scenario(&config)?;
    let alloc = round_robin(scenario.n_rb, scenario.n_providers())?;
    println!("tx power {:.3e} (edge SNR {} dB at {} m)", scenario.consumer.tx_power(), config.target_edge_snr_db, config.d_max);

    let shannon = effective_rates(&scenario, &alloc, 2000, &mut substream(1, FADING_STREAM))?;
    let table = McsTable::from_csv_path(concat!(env!("CARGO_MANIFEST_DIR"), "/config/mcs_example.csv").as_ref())?;
    scenario.rate_model = RateModel::Mcs(table);
    let mcs = effective_rates(&scenario, &alloc, 2000, &mut substream(1, FADING_STREAM))?;

    println!("{:>3} {:>7} {:>9} {:>12} {:>12}", "j", "d (m)", "SNR (dB)", "Shannon Mb/s", "MCS Mb/s");
    for j in 0..scenario.n_providers() {
        println!(
            "{:>3} {:>7.2} {:>9.2} {:>12.3} {:>12.3}",
            j,
            scenario.providers[j].distance_to_ap,
            10.0 * mean_snr(&scenario, j).log10(),
            shannon[j] / 1e6,
            mcs[j] / 1e6
        );
    }
    Ok(())
}
