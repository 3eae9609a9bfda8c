//! Solve the pricing game on a hand-built market and inspect the result.

use mgrid::spg::{buyer_gradient, seller_stationarity_residual, solve_equilibrium, Market, Seller, SolverConfig};

fn main() -> mgrid::Result<()> {
    let seller = |rate: f64, max_scr: f64| Seller { rate, max_scr, cost_coeff: 0.05, tradeoff_exp: 1.0 };
    let market = Market::new(100.0, 200.0, 10.0, vec![seller(40.0, 8.0), seller(20.0, 12.0), seller(5.0, 15.0)])?;
    let eq = solve_equilibrium(&market, &SolverConfig::default())?;

    println!("converged {} after {} iterations (last step {:.1e})", eq.converged, eq.iterations, eq.residual);
    println!("{:>3} {:>8} {:>8} {:>8} {:>9} {:>10}", "j", "price", "amount", "share", "utility", "residual");
    for j in 0..market.len() {
        println!(
            "{:>3} {:>8.4} {:>8.4} {:>8.4} {:>9.4} {:>10.2e}",
            j,
            eq.prices[j],
            eq.amounts[j],
            eq.split.betas[j],
            eq.seller_utilities[j],
            seller_stationarity_residual(&market, &eq.amounts, &eq.prices, j)
        );
        assert!(buyer_gradient(&market, &eq.amounts, &eq.prices, j).abs() < 1e-6 || eq.amounts[j] == 0.0 || eq.amounts[j] == market.sellers[j].max_scr);
    }
    println!("consumer keeps {:.4}, makespan {:.3} s of {:.1} s, buyer utility {:.4}", eq.split.beta0, eq.split.makespan, market.local_makespan(), eq.buyer_utility);
    Ok(())
}
