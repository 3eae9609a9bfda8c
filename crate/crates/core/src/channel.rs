//! Wireless link model: pathloss, Rayleigh fading, SNR and achievable rate.
//!
//! Spectral efficiencies are in bits/s/Hz (log base 2). Multiplying by the
//! bandwidth of one resource block gives bits per second.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::model::{RateModel, Scenario};
use crate::rb_sched::Allocation;

/// Received power at distance `d`: `p_ref * d^-alpha`.
pub fn pathloss(d: f64, alpha: f64, p_ref: f64) -> Result<f64> {
    ensure_positive("distance", d)?;
    ensure_positive("pathloss_exponent", alpha)?;
    ensure_positive("p_ref", p_ref)?;
    Ok(p_ref * d.powf(-alpha))
}

/// Transmit power that puts the mean SNR at `d_edge` on `target_snr_db`.
///
/// With unit-variance fading, `E[p d^-alpha |h|^2] / sigma^2 = p d^-alpha / sigma^2`.
pub fn calibrate_power(d_edge: f64, alpha: f64, noise_power: f64, target_snr_db: f64) -> Result<f64> {
    ensure_positive("d_edge", d_edge)?;
    ensure_positive("pathloss_exponent", alpha)?;
    ensure_positive("noise_power", noise_power)?;
    Ok(noise_power * db_to_linear(target_snr_db) * d_edge.powf(alpha))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One draw of a circularly-symmetric complex Gaussian with unit variance.
pub fn draw_fading(rng: &mut impl Rng) -> Complex64 {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Instantaneous state of one RC-to-RP link on one resource block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub fading: Complex64,
    pub gain: f64,
    pub snr: f64,
}

impl LinkState {
    pub fn new(tx_power: f64, gain: f64, fading: Complex64, noise_power: f64) -> Self {
        Self {
            fading,
            gain,
            snr: tx_power * gain * fading.norm_sqr() / noise_power,
        }
    }
}

/// `log2(1 + p g |h|^2 / sigma^2)` scaled to data units.
pub fn single_link_rate(tx_power: f64, fading: Complex64, gain: f64, noise_power: f64, scale: f64) -> f64 {
    shannon(LinkState::new(tx_power, gain, fading, noise_power).snr) * scale
}

fn shannon(snr: f64) -> f64 {
    (1.0 + snr.max(0.0)).log2()
}

/// Spectral efficiency at `snr` under the configured rate model.
pub fn spectral_efficiency(snr: f64, model: &RateModel) -> f64 {
    match model {
        RateModel::Shannon => shannon(snr),
        RateModel::Mcs(table) => table.spectral_efficiency(snr),
    }
}

/// Sums per-RB rates over the blocks each provider holds.
///
/// `rb_rates[k][j]` is the rate provider `j` would get on block `k`.
pub fn multi_rp_rate(allocation: &Allocation, rb_rates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = allocation.n_providers();
    let n_rb = allocation.n_rb();
    let cols = rb_rates.first().map_or(k, Vec::len);
    if rb_rates.len() != n_rb || rb_rates.iter().any(|row| row.len() != cols) || cols != k {
        return Err(Error::AllocationShape {
            expected_rbs: n_rb,
            expected_providers: k,
            rbs: rb_rates.len(),
            providers: cols,
        });
    }
    let mut rates = vec![0.0; k];
    for (rb, owner) in allocation.owners().iter().enumerate() {
        if let Some(j) = owner {
            rates[*j] += rb_rates[rb][*j];
        }
    }
    Ok(rates)
}

/// Mean SNR of provider `j` (fading averaged out).
pub fn mean_snr(scenario: &Scenario, j: usize) -> f64 {
    let p = &scenario.providers[j];
    let gain = p.distance_to_ap.powf(-scenario.pathloss_exponent);
    scenario.consumer.tx_power() * gain / scenario.noise_power
}

fn rb_rate(scenario: &Scenario, mean_snr: f64, rng: &mut impl Rng) -> f64 {
    let power = if scenario.fading {
        draw_fading(rng).norm_sqr()
    } else {
        1.0
    };
    spectral_efficiency(mean_snr * power, &scenario.rate_model) * scenario.rb_bandwidth_hz
}

/// One fading realization of the full `N_RB x K` per-block rate matrix.
pub fn rate_snapshot(scenario: &Scenario, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let snrs: Vec<f64> = (0..scenario.n_providers()).map(|j| mean_snr(scenario, j)).collect();
    (0..scenario.n_rb)
        .map(|_| snrs.iter().map(|&s| rb_rate(scenario, s, rng)).collect())
        .collect()
}

/// Per-block rates with fading replaced by its mean (`|h|^2 = 1`).
pub fn mean_rate_matrix(scenario: &Scenario) -> Vec<Vec<f64>> {
    let row: Vec<f64> = (0..scenario.n_providers())
        .map(|j| spectral_efficiency(mean_snr(scenario, j), &scenario.rate_model) * scenario.rb_bandwidth_hz)
        .collect();
    vec![row; scenario.n_rb]
}

/// Empirical mean of [`multi_rp_rate`] over `n_draws` i.i.d. fading realizations
/// under a fixed allocation. Without fading every draw is identical.
pub fn effective_rates(
    scenario: &Scenario,
    allocation: &Allocation,
    n_draws: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if n_draws == 0 {
        return Err(crate::error::invalid("n_fading_draws", "at least one draw is required"));
    }
    let k = scenario.n_providers();
    if allocation.n_providers() != k || allocation.n_rb() != scenario.n_rb {
        return Err(Error::AllocationShape {
            expected_rbs: scenario.n_rb,
            expected_providers: k,
            rbs: allocation.n_rb(),
            providers: allocation.n_providers(),
        });
    }
    let snrs: Vec<f64> = (0..k).map(|j| mean_snr(scenario, j)).collect();
    let draws = if scenario.fading { n_draws } else { 1 };
    let mut sums = vec![0.0; k];
    for _ in 0..draws {
        for owner in allocation.owners().iter().flatten() {
            sums[*owner] += rb_rate(scenario, snrs[*owner], rng);
        }
    }
    Ok(sums.into_iter().map(|s| s / draws as f64).collect())
}

/// User-supplied adaptive modulation and coding table.
///
/// Rows map an SNR threshold (dB) to the spectral efficiency used at or above
/// it. Below the first threshold the rate is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    rows: Vec<McsRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsRow {
    pub snr_db_threshold: f64,
    pub spectral_efficiency: f64,
}

impl McsTable {
    /// Validates ordering and that no entry beats Shannon capacity at its threshold.
    pub fn new(rows: Vec<McsRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMcsTable("table has no rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if !row.snr_db_threshold.is_finite() || !(row.spectral_efficiency >= 0.0) {
                return Err(Error::InvalidMcsTable(format!("row {i} is not finite/nonnegative")));
            }
            let capacity = shannon(db_to_linear(row.snr_db_threshold));
            if row.spectral_efficiency > capacity {
                return Err(Error::InvalidMcsTable(format!(
                    "row {i}: efficiency {} exceeds capacity {capacity} at {} dB",
                    row.spectral_efficiency, row.snr_db_threshold
                )));
            }
            if i > 0 {
                let prev = rows[i - 1];
                if row.snr_db_threshold <= prev.snr_db_threshold {
                    return Err(Error::InvalidMcsTable(format!("row {i}: thresholds must ascend")));
                }
                if row.spectral_efficiency < prev.spectral_efficiency {
                    return Err(Error::InvalidMcsTable(format!("row {i}: efficiency decreases")));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let rows = csv.deserialize().collect::<std::result::Result<Vec<McsRow>, _>>()?;
        Self::new(rows)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn rows(&self) -> &[McsRow] {
        &self.rows
    }

    pub fn spectral_efficiency(&self, snr: f64) -> f64 {
        if snr <= 0.0 {
            return 0.0;
        }
        let snr_db = 10.0 * snr.log10();
        let idx = self.rows.partition_point(|r| r.snr_db_threshold <= snr_db);
        if idx == 0 {
            0.0
        } else {
            self.rows[idx - 1].spectral_efficiency
        }
    }
}
