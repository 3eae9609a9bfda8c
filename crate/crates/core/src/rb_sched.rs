//! Assignment of transmission resource blocks to providers.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbPolicy {
    #[default]
    RoundRobin,
    MaxWeight,
}

impl RbPolicy {
    pub fn name(self) -> &'static str {
        match self {
            RbPolicy::RoundRobin => "round_robin",
            RbPolicy::MaxWeight => "max_weight",
        }
    }
}

impl std::str::FromStr for RbPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "round_robin" | "rr" => Ok(RbPolicy::RoundRobin),
            "max_weight" | "mw" => Ok(RbPolicy::MaxWeight),
            other => Err(invalid("rb_policy", format!("unknown policy `{other}`"))),
        }
    }
}

/// An `N_RB x K` 0/1 allocation with at most one provider per block.
///
/// Stored as the owner of each block, which makes the one-owner invariant
/// structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    owners: Vec<Option<usize>>,
    n_providers: usize,
}

impl Allocation {
    pub fn from_owners(owners: Vec<Option<usize>>, n_providers: usize) -> Result<Self> {
        if let Some(j) = owners.iter().flatten().find(|&&j| j >= n_providers) {
            return Err(invalid("allocation", format!("owner {j} out of range for {n_providers} providers")));
        }
        Ok(Self { owners, n_providers })
    }

    /// Builds from an indicator matrix `s[k][j]`, rejecting blocks with two owners.
    pub fn from_matrix(matrix: &[Vec<u8>]) -> Result<Self> {
        let n_providers = matrix.first().map_or(0, Vec::len);
        let mut owners = Vec::with_capacity(matrix.len());
        for (rb, row) in matrix.iter().enumerate() {
            if row.len() != n_providers {
                return Err(Error::AllocationShape {
                    expected_rbs: matrix.len(),
                    expected_providers: n_providers,
                    rbs: matrix.len(),
                    providers: row.len(),
                });
            }
            let mut owner = None;
            for (j, &s) in row.iter().enumerate() {
                match s {
                    0 => {}
                    1 if owner.is_none() => owner = Some(j),
                    1 => return Err(Error::DoubleAssignedBlock { rb }),
                    other => return Err(invalid("allocation", format!("entry {other} is not 0/1"))),
                }
            }
            owners.push(owner);
        }
        Ok(Self { owners, n_providers })
    }

    pub fn to_matrix(&self) -> Vec<Vec<u8>> {
        self.owners
            .iter()
            .map(|owner| {
                let mut row = vec![0; self.n_providers];
                if let Some(j) = owner {
                    row[*j] = 1;
                }
                row
            })
            .collect()
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owners
    }

    pub fn n_rb(&self) -> usize {
        self.owners.len()
    }

    pub fn n_providers(&self) -> usize {
        self.n_providers
    }

    pub fn block_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_providers];
        for j in self.owners.iter().flatten() {
            counts[*j] += 1;
        }
        counts
    }
}

/// Block `k` goes to provider `k mod K`.
pub fn round_robin(n_rb: usize, n_providers: usize) -> Result<Allocation> {
    if n_rb == 0 || n_providers == 0 {
        return Err(invalid("round_robin", "needs at least one block and one provider"));
    }
    Allocation::from_owners((0..n_rb).map(|k| Some(k % n_providers)).collect(), n_providers)
}

/// Block `k` goes to `argmax_j weights[j] * rates[k][j]`, lowest index on ties.
pub fn max_weight(rates: &[Vec<f64>], weights: &[f64]) -> Result<Allocation> {
    let k = weights.len();
    if k == 0 || rates.is_empty() {
        return Err(invalid("max_weight", "needs at least one block and one provider"));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(invalid("weights", "must be nonnegative"));
    }
    let owners = rates
        .iter()
        .map(|row| {
            if row.len() != k {
                return Err(Error::AllocationShape {
                    expected_rbs: rates.len(),
                    expected_providers: k,
                    rbs: rates.len(),
                    providers: row.len(),
                });
            }
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (j, (&r, &w)) in row.iter().zip(weights).enumerate() {
                if !(r >= 0.0) {
                    return Err(invalid("rates", "must be nonnegative"));
                }
                let score = w * r;
                if score > best_score {
                    best = j;
                    best_score = score;
                }
            }
            Ok(Some(best))
        })
        .collect::<Result<Vec<_>>>()?;
    Allocation::from_owners(owners, k)
}
