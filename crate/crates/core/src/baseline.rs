//! Reference policies the pricing game is compared against.

use serde::{Deserialize, Serialize};

use crate::spg::{Equilibrium, Market};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BaselinePolicy {
    /// The consumer runs everything itself.
    Nonparallel,
    /// Equal amount borrowed from every provider.
    Ese,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub policy: BaselinePolicy,
    pub makespan: f64,
    /// Clipped at zero.
    pub time_saved: f64,
    pub amounts: Vec<f64>,
}

impl BaselineResult {
    pub fn saved_ratio(&self, local_makespan: f64) -> f64 {
        if local_makespan > 0.0 {
            self.time_saved / local_makespan
        } else {
            0.0
        }
    }
}

pub fn nonparallel(market: &Market) -> BaselineResult {
    BaselineResult {
        policy: BaselinePolicy::Nonparallel,
        makespan: market.local_makespan(),
        time_saved: 0.0,
        amounts: vec![0.0; market.len()],
    }
}

/// Borrows `min(amount, max_scr_j)` from every provider and splits the load optimally.
pub fn ese_schedule(market: &Market, amount: f64) -> BaselineResult {
    let amounts: Vec<f64> = market
        .sellers
        .iter()
        .map(|s| amount.max(0.0).min(s.max_scr))
        .collect();
    let split = market.split(&amounts);
    BaselineResult {
        policy: BaselinePolicy::Ese,
        makespan: split.makespan,
        time_saved: split.time_saved_clipped(),
        amounts,
    }
}

/// Mean amount the pricing game bought per provider.
pub fn ese_budget_from_equilibrium(equilibrium: &Equilibrium) -> f64 {
    let n = equilibrium.amounts.len();
    if n == 0 {
        return 0.0;
    }
    equilibrium.amounts.iter().sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::LoadSplit;
    use crate::spg::{Seller, SolverConfig};

    fn market(sellers: &[(f64, f64)]) -> Market {
        Market::new(
            100.0,
            200.0,
            10.0,
            sellers
                .iter()
                .map(|&(rate, max_scr)| Seller {
                    rate,
                    max_scr,
                    cost_coeff: 0.05,
                    tradeoff_exp: 1.0,
                })
                .collect(),
        )
        .unwrap()
    }

    fn equilibrium_with(amounts: Vec<f64>) -> Equilibrium {
        Equilibrium {
            prices: vec![0.1; amounts.len()],
            split: LoadSplit::compute(1.0, 1.0, 1.0, &[], &[]),
            seller_utilities: vec![0.0; amounts.len()],
            amounts,
            buyer_utility: 0.0,
            iterations: 1,
            converged: true,
            residual: 0.0,
            trace: vec![],
        }
    }

    #[test]
    fn ese_budget_examples() {
        assert_eq!(ese_budget_from_equilibrium(&equilibrium_with(vec![1.0, 1.0, 1.0])), 1.0);
        assert_eq!(ese_budget_from_equilibrium(&equilibrium_with(vec![0.0, 2.0])), 1.0);
        let a = ese_budget_from_equilibrium(&equilibrium_with(vec![0.0, 0.0]));
        assert_eq!(a, 0.0);
        assert_eq!(ese_schedule(&market(&[(5.0, 2.0), (9.0, 3.0)]), a).time_saved, 0.0);
    }

    #[test]
    fn zero_budget_saves_nothing() {
        let r = ese_schedule(&market(&[(10.0, 5.0), (20.0, 5.0)]), 0.0);
        assert_eq!(r.time_saved, 0.0);
        assert_eq!(r.makespan, 10.0);
    }

    #[test]
    fn homogeneous_providers_get_equal_shares() {
        let m = market(&[(10.0, 5.0); 4]);
        let r = ese_schedule(&m, 2.0);
        let split = m.split(&r.amounts);
        assert!(split.betas.windows(2).all(|w| w[0] == w[1]));
        assert!(r.time_saved > 0.0);
    }

    #[test]
    fn amounts_clip_at_each_cap() {
        let r = ese_schedule(&market(&[(10.0, 1.0), (10.0, 5.0)]), 3.0);
        assert_eq!(r.amounts, vec![1.0, 3.0]);
    }

    #[test]
    fn ordering_does_not_matter() {
        let a = ese_schedule(&market(&[(3.0, 1.0), (30.0, 4.0), (9.0, 2.5)]), 2.0);
        let b = ese_schedule(&market(&[(30.0, 4.0), (9.0, 2.5), (3.0, 1.0)]), 2.0);
        assert!((a.time_saved - b.time_saved).abs() <= 1e-12 * a.time_saved);
    }

    #[test]
    fn nonparallel_saves_nothing() {
        let m = market(&[(3.0, 1.0)]);
        let r = nonparallel(&m);
        assert_eq!(r.time_saved, 0.0);
        assert_eq!(r.makespan, m.local_makespan());
    }

    // Symmetric interior equilibrium: equal shares at the game's own amount
    // reproduce the game's allocation.
    #[test]
    fn symmetric_equilibrium_matches_equal_share() {
        let m = market(&[(10.0, 50.0); 3]);
        let eq = crate::spg::solve_equilibrium(&m, &SolverConfig { tol: 1e-10, ..Default::default() }).unwrap();
        assert!(eq.converged);
        assert!(eq.amounts.iter().all(|&c| c > 0.0 && c < 50.0));
        let r = ese_schedule(&m, ese_budget_from_equilibrium(&eq));
        assert!((r.time_saved - eq.split.time_saved_clipped()).abs() <= 1e-8 * r.time_saved);
    }
}
