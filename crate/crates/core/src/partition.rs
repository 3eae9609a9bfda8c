//! Closed-form divisible-load partitioning.
//!
//! A fraction `beta_j` of the task goes to provider `j`: its input data is
//! sent over a link of rate `R_j` and processed at rate `C_j`, while the
//! consumer keeps `beta_0` for itself. The optimal split equalizes every
//! branch's finish time, so the makespan is the consumer's own compute time
//! `beta_0 * V / C_c`. Result return time is not modelled.

use serde::{Deserialize, Serialize};

/// Closed-form optimal fraction offloaded to a single provider.
///
/// Returns 0 when the provider offers no compute or no link.
pub fn single_rp_split(volume: f64, balance_factor: f64, own_capacity: f64, provider_capacity: f64, rate: f64) -> f64 {
    if provider_capacity <= 0.0 || rate <= 0.0 {
        return 0.0;
    }
    let data = balance_factor * volume;
    let num = rate * provider_capacity * volume;
    let den = data * provider_capacity * own_capacity + rate * own_capacity * volume + num;
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Transmit plus processing time of the offloaded share: `beta S / R + beta V / C_v`.
///
/// Infinite when a positive share has nowhere to go.
pub fn single_rp_makespan(beta: f64, volume: f64, balance_factor: f64, provider_capacity: f64, rate: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    if provider_capacity <= 0.0 || rate <= 0.0 {
        return f64::INFINITY;
    }
    beta * balance_factor * volume / rate + beta * volume / provider_capacity
}

/// Time saved against running locally, clipped at zero.
///
/// The cooperative makespan is the later of the two branches; at the optimal
/// split they coincide with [`single_rp_makespan`].
pub fn time_saved_single(
    beta: f64,
    volume: f64,
    balance_factor: f64,
    own_capacity: f64,
    provider_capacity: f64,
    rate: f64,
) -> f64 {
    let local = volume / own_capacity;
    let own_branch = (1.0 - beta) * volume / own_capacity;
    let remote = single_rp_makespan(beta, volume, balance_factor, provider_capacity, rate);
    (local - own_branch.max(remote)).max(0.0)
}

/// `V R_j C_j / (S C_c C_j + V C_c R_j)`: provider `j`'s load relative to the
/// consumer's. Zero for an absent provider (no compute or no link).
pub fn relative_load(volume: f64, data: f64, own_capacity: f64, capacity: f64, rate: f64) -> f64 {
    if capacity <= 0.0 || rate <= 0.0 {
        return 0.0;
    }
    volume * rate * capacity / (data * own_capacity * capacity + volume * own_capacity * rate)
}

/// Fraction the consumer keeps for itself.
pub fn multi_beta0(volume: f64, data: f64, own_capacity: f64, capacities: &[f64], rates: &[f64]) -> f64 {
    debug_assert_eq!(capacities.len(), rates.len());
    let sum: f64 = capacities
        .iter()
        .zip(rates)
        .map(|(&c, &r)| relative_load(volume, data, own_capacity, c, r))
        .sum();
    1.0 / (1.0 + sum)
}

pub fn multi_beta_j(beta0: f64, volume: f64, data: f64, own_capacity: f64, capacity: f64, rate: f64) -> f64 {
    beta0 * relative_load(volume, data, own_capacity, capacity, rate)
}

/// `max((1 - beta_0) V / C_c, 0)`.
pub fn time_saved_multi(beta0: f64, volume: f64, own_capacity: f64) -> f64 {
    ((1.0 - beta0) * volume / own_capacity).max(0.0)
}

/// A complete load split across the consumer and its providers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSplit {
    pub beta0: f64,
    pub betas: Vec<f64>,
    pub makespan: f64,
    pub local_makespan: f64,
    /// `local_makespan - makespan`, unclipped.
    pub time_saved: f64,
}

impl LoadSplit {
    pub fn compute(volume: f64, data: f64, own_capacity: f64, capacities: &[f64], rates: &[f64]) -> Self {
        let beta0 = multi_beta0(volume, data, own_capacity, capacities, rates);
        let betas = capacities
            .iter()
            .zip(rates)
            .map(|(&c, &r)| multi_beta_j(beta0, volume, data, own_capacity, c, r))
            .collect();
        let local = volume / own_capacity;
        let makespan = beta0 * local;
        Self {
            beta0,
            betas,
            makespan,
            local_makespan: local,
            time_saved: local - makespan,
        }
    }

    pub fn time_saved_clipped(&self) -> f64 {
        self.time_saved.max(0.0)
    }

    /// Saved time as a fraction of the local makespan.
    pub fn saved_ratio(&self) -> f64 {
        if self.local_makespan > 0.0 {
            self.time_saved_clipped() / self.local_makespan
        } else {
            0.0
        }
    }

    /// `|beta_0 + sum beta_j - 1|`.
    pub fn normalization_error(&self) -> f64 {
        (self.beta0 + self.betas.iter().sum::<f64>() - 1.0).abs()
    }

    /// Per-provider `|own compute time - (transmit + remote compute time)|`,
    /// or `None` for providers that take no load.
    pub fn balance_residuals(
        &self,
        volume: f64,
        data: f64,
        own_capacity: f64,
        capacities: &[f64],
        rates: &[f64],
    ) -> Vec<Option<f64>> {
        let own = self.beta0 * volume / own_capacity;
        self.betas
            .iter()
            .zip(capacities.iter().zip(rates))
            .map(|(&b, (&c, &r))| {
                (c > 0.0 && r > 0.0).then(|| (own - (b * data / r + b * volume / c)).abs())
            })
            .collect()
    }
}
