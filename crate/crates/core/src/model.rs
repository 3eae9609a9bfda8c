//! Domain types for the mobile grid and randomized scenario generation.
//!
//! A [`Scenario`] is one resource consumer (the task sponsor, reached through
//! an access point at the room center) plus the set of mobile resource
//! providers it may borrow sharable compute from. Generation is a pure
//! function of the [`ScenarioConfig`]: the same config and seed always give
//! the same scenario.
//!
//! Units are abstract: computing volume in compute units, data in bits,
//! capacities in compute units per second, rates in bits per second.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, McsTable};
use crate::error::{ensure_nonnegative, ensure_positive, invalid, Error, Result};

/// RNG substream used for provider placement and parameters.
pub const GEOMETRY_STREAM: u64 = 0;
/// RNG substream used for the fading snapshot the RB scheduler sees.
pub const SCHEDULING_STREAM: u64 = 1;
/// RNG substream used for fading draws when averaging rates.
pub const FADING_STREAM: u64 = 2;

/// Independent ChaCha8 stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const REL_TOL_DATA_VOLUME: f64 = 1e-12;

/// A divisible task: `data_volume = balance_factor * computing_volume`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    computing_volume: f64,
    data_volume: f64,
    balance_factor: f64,
}

impl Task {
    pub fn new(computing_volume: f64, balance_factor: f64) -> Result<Self> {
        ensure_nonnegative("computing_volume", computing_volume)?;
        ensure_nonnegative("balance_factor", balance_factor)?;
        Ok(Self {
            computing_volume,
            data_volume: balance_factor * computing_volume,
            balance_factor,
        })
    }

    /// Like [`Task::new`] but also checks a caller-supplied data volume.
    pub fn with_data_volume(
        computing_volume: f64,
        balance_factor: f64,
        data_volume: f64,
    ) -> Result<Self> {
        let task = Self::new(computing_volume, balance_factor)?;
        let scale = task.data_volume.abs().max(data_volume.abs());
        if (task.data_volume - data_volume).abs() > REL_TOL_DATA_VOLUME * scale {
            return Err(invalid(
                "data_volume",
                format!(
                    "{data_volume} is inconsistent with balance_factor * computing_volume = {}",
                    task.data_volume
                ),
            ));
        }
        Ok(task)
    }

    pub fn computing_volume(&self) -> f64 {
        self.computing_volume
    }

    pub fn data_volume(&self) -> f64 {
        self.data_volume
    }

    pub fn balance_factor(&self) -> f64 {
        self.balance_factor
    }
}

/// The task sponsor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consumer {
    own_capacity: f64,
    tx_power: f64,
}

impl Consumer {
    pub fn new(own_capacity: f64, tx_power: f64) -> Result<Self> {
        ensure_positive("own_capacity", own_capacity)?;
        ensure_positive("tx_power", tx_power)?;
        Ok(Self {
            own_capacity,
            tx_power,
        })
    }

    pub fn own_capacity(&self) -> f64 {
        self.own_capacity
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }
}

/// One mobile resource provider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provider {
    pub id: usize,
    pub position: (f64, f64),
    /// Largest amount of sharable compute this provider can lend.
    pub max_scr: f64,
    pub cost_coeff: f64,
    pub tradeoff_exp: f64,
    pub distance_to_ap: f64,
}

impl Provider {
    pub fn new(
        id: usize,
        position: (f64, f64),
        max_scr: f64,
        cost_coeff: f64,
        tradeoff_exp: f64,
        distance_to_ap: f64,
    ) -> Result<Self> {
        ensure_positive("max_scr", max_scr)?;
        ensure_positive("cost_coeff", cost_coeff)?;
        ensure_positive("distance_to_ap", distance_to_ap)?;
        if !(tradeoff_exp >= 1.0 && tradeoff_exp.is_finite()) {
            return Err(invalid(
                "tradeoff_exp",
                format!("must be >= 1, got {tradeoff_exp}"),
            ));
        }
        Ok(Self {
            id,
            position,
            max_scr,
            cost_coeff,
            tradeoff_exp,
            distance_to_ap,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModelKind {
    #[default]
    Shannon,
    McsTable,
}

/// How per-RB spectral efficiency is derived from SNR.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RateModel {
    #[default]
    Shannon,
    Mcs(McsTable),
}

/// Proxy-based grid (RBs may be frequency blocks or slots) or ad hoc D2D grid
/// (RBs are time slots only). The math is identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    #[default]
    Proxy,
    AdHoc,
}

/// Flat configuration for [`build_scenario`]. Every field has a default, so a
/// config file only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Number of providers K.
    pub n_providers: usize,
    pub computing_volume: f64,
    pub balance_factor: f64,
    /// Optional explicit data volume; must equal `balance_factor * computing_volume`.
    pub data_volume: Option<f64>,
    pub own_capacity: f64,
    /// Transmit power. When absent it is calibrated so that the mean SNR at
    /// `d_max` equals `target_edge_snr_db`.
    pub tx_power: Option<f64>,
    pub target_edge_snr_db: f64,
    pub noise_power: f64,
    pub pathloss_exponent: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Side of the square room in meters. Informational only.
    pub room_size: f64,
    pub n_rb: usize,
    pub bandwidth_hz: f64,
    /// Informational only; rates are expressed per second.
    pub slot_duration_s: f64,
    /// Informational only.
    pub carrier_frequency_hz: f64,
    pub rate_model: RateModelKind,
    pub mcs_table: Option<PathBuf>,
    pub fading: bool,
    pub n_fading_draws: usize,
    pub grid_mode: GridMode,
    pub cost_coeff: f64,
    pub tradeoff_exp: f64,
    /// Provider caps are drawn uniformly from
    /// `[max_scr_min_factor, max_scr_max_factor] * own_capacity`.
    pub max_scr_min_factor: f64,
    pub max_scr_max_factor: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_providers: 5,
            computing_volume: 1000.0,
            balance_factor: 5.0e5,
            data_volume: None,
            own_capacity: 10.0,
            tx_power: None,
            target_edge_snr_db: 0.0,
            noise_power: 1.0,
            pathloss_exponent: 4.0,
            d_min: 3.0,
            d_max: 10.0,
            room_size: 10.0,
            n_rb: 50,
            bandwidth_hz: 10.0e6,
            slot_duration_s: 1.0e-3,
            carrier_frequency_hz: 2.0e9,
            rate_model: RateModelKind::Shannon,
            mcs_table: None,
            fading: true,
            n_fading_draws: 1000,
            grid_mode: GridMode::Proxy,
            cost_coeff: 0.05,
            tradeoff_exp: 1.0,
            max_scr_min_factor: 0.5,
            max_scr_max_factor: 1.5,
            rng_seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_providers == 0 {
            return Err(Error::EmptyProviderSet);
        }
        ensure_positive("computing_volume", self.computing_volume)?;
        ensure_nonnegative("balance_factor", self.balance_factor)?;
        ensure_positive("own_capacity", self.own_capacity)?;
        if let Some(p) = self.tx_power {
            ensure_positive("tx_power", p)?;
        }
        ensure_positive("noise_power", self.noise_power)?;
        ensure_positive("pathloss_exponent", self.pathloss_exponent)?;
        ensure_positive("d_min", self.d_min)?;
        ensure_positive("d_max", self.d_max)?;
        if self.d_min > self.d_max {
            return Err(invalid(
                "d_min",
                format!("d_min {} exceeds d_max {}", self.d_min, self.d_max),
            ));
        }
        if self.n_rb == 0 {
            return Err(invalid("n_rb", "at least one resource block is required"));
        }
        ensure_positive("bandwidth_hz", self.bandwidth_hz)?;
        if self.n_fading_draws == 0 {
            return Err(invalid("n_fading_draws", "at least one draw is required"));
        }
        ensure_positive("cost_coeff", self.cost_coeff)?;
        if !(self.tradeoff_exp >= 1.0) {
            return Err(invalid("tradeoff_exp", "must be >= 1"));
        }
        ensure_positive("max_scr_min_factor", self.max_scr_min_factor)?;
        ensure_positive("max_scr_max_factor", self.max_scr_max_factor)?;
        if self.max_scr_min_factor > self.max_scr_max_factor {
            return Err(invalid(
                "max_scr_min_factor",
                "must not exceed max_scr_max_factor",
            ));
        }
        if self.rate_model == RateModelKind::McsTable && self.mcs_table.is_none() {
            return Err(invalid(
                "mcs_table",
                "rate_model = mcs_table needs a table path",
            ));
        }
        Ok(())
    }
}

/// A fully sampled scenario. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub task: Task,
    pub consumer: Consumer,
    pub providers: Vec<Provider>,
    pub n_rb: usize,
    pub noise_power: f64,
    pub pathloss_exponent: f64,
    /// Bandwidth of one resource block; scales spectral efficiency to bits/s.
    pub rb_bandwidth_hz: f64,
    pub fading: bool,
    pub n_fading_draws: usize,
    pub grid_mode: GridMode,
    pub ap_position: (f64, f64),
    pub rng_seed: u64,
    pub rate_model: RateModel,
}

impl Scenario {
    pub fn n_providers(&self) -> usize {
        self.providers.len()
    }

    /// Time for the consumer to run the whole task alone.
    pub fn local_makespan(&self) -> f64 {
        local_makespan(&self.task, &self.consumer)
    }
}

/// Samples providers at a uniform distance in `[d_min, d_max]` and a uniform
/// angle around the access point.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let task = match config.data_volume {
        Some(s) => Task::with_data_volume(config.computing_volume, config.balance_factor, s)?,
        None => Task::new(config.computing_volume, config.balance_factor)?,
    };
    let tx_power = match config.tx_power {
        Some(p) => p,
        None => channel::calibrate_power(
            config.d_max,
            config.pathloss_exponent,
            config.noise_power,
            config.target_edge_snr_db,
        )?,
    };
    let consumer = Consumer::new(config.own_capacity, tx_power)?;
    let rate_model = match (config.rate_model, &config.mcs_table) {
        (RateModelKind::Shannon, _) => RateModel::Shannon,
        (RateModelKind::McsTable, Some(path)) => RateModel::Mcs(McsTable::from_csv_path(path)?),
        (RateModelKind::McsTable, None) => unreachable!("rejected by validate"),
    };

    let ap_position = (0.0, 0.0);
    let mut rng = substream(config.rng_seed, GEOMETRY_STREAM);
    let providers = (0..config.n_providers)
        .map(|id| {
            let distance = uniform(&mut rng, config.d_min, config.d_max);
            let angle = rng.random::<f64>() * TAU;
            let position = (
                ap_position.0 + distance * angle.cos(),
                ap_position.1 + distance * angle.sin(),
            );
            let factor = uniform(&mut rng, config.max_scr_min_factor, config.max_scr_max_factor);
            Provider::new(
                id,
                position,
                factor * config.own_capacity,
                config.cost_coeff,
                config.tradeoff_exp,
                distance,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Scenario {
        task,
        consumer,
        providers,
        n_rb: config.n_rb,
        noise_power: config.noise_power,
        pathloss_exponent: config.pathloss_exponent,
        rb_bandwidth_hz: config.bandwidth_hz / config.n_rb as f64,
        fading: config.fading,
        n_fading_draws: config.n_fading_draws,
        grid_mode: config.grid_mode,
        ap_position,
        rng_seed: config.rng_seed,
        rate_model,
    })
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Makespan of running the task on the consumer alone: `V / C_c`.
pub fn local_makespan(task: &Task, consumer: &Consumer) -> f64 {
    task.computing_volume() / consumer.own_capacity()
}

/// Reads a flat config from a `.json` or `.toml` file (chosen by extension).
pub fn load_config<T>(path: &Path) -> Result<T>
where
    T: for<'de> Deserialize<'de>,
{
    let text = fs::read_to_string(path)?;
    let err = |reason: String| Error::Config {
        path: path.to_path_buf(),
        reason,
    };
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).map_err(|e| err(e.to_string())),
        Some("toml") => toml::from_str(&text).map_err(|e| err(e.to_string())),
        other => Err(err(format!(
            "unsupported extension {other:?}, expected .json or .toml"
        ))),
    }
}
