//! Stackelberg pricing game between the consumer (buyer) and providers (sellers).
//!
//! Each seller `j` posts a unit price `lambda_j` for its sharable compute. The
//! buyer answers with the amounts `C_j` that maximize
//!
//! ```text
//! U_c = T_saved(C) - sum_j lambda_j C_j,    0 <= C_j <= max_scr_j
//! ```
//!
//! and each seller earns `U_j = (lambda_j - eta_j) C_j^b_j`. Prices are
//! measured in seconds of saved time per unit of compute so that `U_c` is in
//! seconds.
//!
//! The buyer's problem is concave and its per-seller stationarity condition
//! has the closed form `C_j = u_j / sqrt(lambda_j) - v_j`, where `u_j` and
//! `v_j` depend on the other amounts through `w_j`. Sellers move their price
//! along the fixed-point map `lambda_j <- eta_j + 2 C_j lambda_j^{3/2} / (b_j u_j)`
//! obtained by setting `dU_j/dlambda_j = 0` with `w_j` held fixed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::model::{Provider, Scenario};
use crate::partition::{relative_load, LoadSplit};

/// What the buyer needs to know about one seller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seller {
    /// Effective link rate from the consumer to this provider.
    pub rate: f64,
    pub max_scr: f64,
    pub cost_coeff: f64,
    pub tradeoff_exp: f64,
}

impl Seller {
    pub fn from_provider(provider: &Provider, rate: f64) -> Self {
        Self {
            rate,
            max_scr: provider.max_scr,
            cost_coeff: provider.cost_coeff,
            tradeoff_exp: provider.tradeoff_exp,
        }
    }
}

/// The inputs of one game: the task, the consumer's own capacity and the sellers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Market {
    pub volume: f64,
    pub data: f64,
    pub own_capacity: f64,
    pub sellers: Vec<Seller>,
}

impl Market {
    pub fn new(volume: f64, data: f64, own_capacity: f64, sellers: Vec<Seller>) -> Result<Self> {
        ensure_positive("computing_volume", volume)?;
        if !(data >= 0.0) {
            return Err(invalid("data_volume", "must be nonnegative"));
        }
        ensure_positive("own_capacity", own_capacity)?;
        for s in &sellers {
            if !(s.rate >= 0.0 && s.max_scr >= 0.0) {
                return Err(invalid("seller", "rate and max_scr must be nonnegative"));
            }
            ensure_positive("cost_coeff", s.cost_coeff)?;
            if !(s.tradeoff_exp >= 1.0) {
                return Err(invalid("tradeoff_exp", "must be >= 1"));
            }
        }
        Ok(Self {
            volume,
            data,
            own_capacity,
            sellers,
        })
    }

    /// Pairs each provider of `scenario` with its effective rate.
    pub fn from_scenario(scenario: &Scenario, rates: &[f64]) -> Result<Self> {
        if rates.len() != scenario.n_providers() {
            return Err(invalid("rates", "one rate per provider is required"));
        }
        let sellers = scenario
            .providers
            .iter()
            .zip(rates)
            .map(|(p, &r)| Seller::from_provider(p, r))
            .collect();
        Self::new(
            scenario.task.computing_volume(),
            scenario.task.data_volume(),
            scenario.consumer.own_capacity(),
            sellers,
        )
    }

    pub fn len(&self) -> usize {
        self.sellers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sellers.is_empty()
    }

    pub fn local_makespan(&self) -> f64 {
        self.volume / self.own_capacity
    }

    fn load(&self, j: usize, amount: f64) -> f64 {
        relative_load(self.volume, self.data, self.own_capacity, amount, self.sellers[j].rate)
    }

    pub fn beta0(&self, amounts: &[f64]) -> f64 {
        let total: f64 = amounts.iter().enumerate().map(|(j, &c)| self.load(j, c)).sum();
        1.0 / (1.0 + total)
    }

    pub fn split(&self, amounts: &[f64]) -> LoadSplit {
        let rates: Vec<f64> = self.sellers.iter().map(|s| s.rate).collect();
        LoadSplit::compute(self.volume, self.data, self.own_capacity, amounts, &rates)
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.sellers.iter().map(|s| s.max_scr).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.sellers.iter().map(|s| s.rate).collect()
    }
}

/// Unclipped time saved minus total payment.
pub fn buyer_utility(market: &Market, amounts: &[f64], prices: &[f64]) -> f64 {
    let saved = (1.0 - market.beta0(amounts)) * market.local_makespan();
    let paid: f64 = amounts.iter().zip(prices).map(|(c, p)| c * p).sum();
    saved - paid
}

/// `(lambda - eta) C^b`.
pub fn seller_utility(price: f64, amount: f64, cost_coeff: f64, tradeoff_exp: f64) -> f64 {
    if amount <= 0.0 {
        return 0.0;
    }
    (price - cost_coeff) * amount.powf(tradeoff_exp)
}

/// Coefficients of the buyer's closed-form demand for seller `j`:
/// `C_j = u / sqrt(lambda_j) - v`. `w` is the other sellers' total relative load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxCoefficients {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl AuxCoefficients {
    /// Demand before the box constraint is applied.
    pub fn unclamped_demand(&self, price: f64) -> f64 {
        self.u / price.sqrt() - self.v
    }
}

pub fn aux_coefficients(market: &Market, amounts: &[f64], j: usize) -> AuxCoefficients {
    let w: f64 = amounts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(i, &c)| market.load(i, c))
        .sum();
    aux_from_w(market, j, w)
}

fn aux_from_w(market: &Market, j: usize, w: f64) -> AuxCoefficients {
    let rate = market.sellers[j].rate;
    if rate <= 0.0 {
        return AuxCoefficients { u: 0.0, v: 0.0, w };
    }
    let (vol, data, cc) = (market.volume, market.data, market.own_capacity);
    let den = data * cc + vol * rate + data * cc * w;
    AuxCoefficients {
        u: vol * rate * vol.sqrt() / den,
        v: vol * cc * rate * (1.0 + w) / den,
        w,
    }
}

/// `dU_c/dC_j = beta_0^2 V^3 R_j^2 / (S C_c C_j + V C_c R_j)^2 - lambda_j`.
pub fn buyer_gradient(market: &Market, amounts: &[f64], prices: &[f64], j: usize) -> f64 {
    let rate = market.sellers[j].rate;
    if rate <= 0.0 {
        return -prices[j];
    }
    let beta0 = market.beta0(amounts);
    let (vol, data, cc) = (market.volume, market.data, market.own_capacity);
    let den = data * cc * amounts[j] + vol * cc * rate;
    beta0 * beta0 * vol.powi(3) * rate * rate / (den * den) - prices[j]
}

/// Stopping rule of the buyer's inner coordinate sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_sweeps: 200,
        }
    }
}

/// Amounts that satisfy every seller's stationarity condition for a given `beta0`.
///
/// From `dU_c/dC_j = 0`: `S C_c C_j + V C_c R_j = beta0 V^{3/2} R_j / sqrt(lambda_j)`.
fn demand_at_beta0(market: &Market, prices: &[f64], beta0: f64) -> Vec<f64> {
    let (vol, data, cc) = (market.volume, market.data, market.own_capacity);
    market
        .sellers
        .iter()
        .zip(prices)
        .map(|(s, &p)| {
            if s.rate <= 0.0 || data <= 0.0 {
                return 0.0;
            }
            let c = (beta0 * vol.powf(1.5) * s.rate / p.sqrt() - vol * cc * s.rate) / (data * cc);
            c.clamp(0.0, s.max_scr)
        })
        .collect()
}

/// Solves `beta0 (1 + sum_j a_j(C_j(beta0))) = 1` by bisection. The left side
/// is strictly increasing in `beta0`, so the root is unique on `(0, 1]`.
fn seed_from_beta0(market: &Market, prices: &[f64]) -> Vec<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let amounts = demand_at_beta0(market, prices, mid);
        if mid / market.beta0(&amounts) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    demand_at_beta0(market, prices, 0.5 * (lo + hi))
}

/// The buyer's optimal amounts at `prices`.
///
/// Each seller's closed-form demand depends on the others through `w_j`, so
/// the demands are swept in order (Gauss-Seidel, always using the latest
/// amounts) until no amount moves by more than `opts.tol`. Plain sweeps can
/// crawl when the sellers are close substitutes, so they start from the
/// point where every demand agrees on a common `beta0`; the sweeps then
/// confirm it. Because `U_c` is concave on the box the fixed point is its
/// maximizer.
pub fn buyer_best_response(market: &Market, prices: &[f64], opts: InnerOptions) -> Result<Vec<f64>> {
    let k = market.len();
    if prices.len() != k {
        return Err(invalid("prices", "one price per seller is required"));
    }
    for &p in prices {
        ensure_positive("price", p)?;
    }
    let mut amounts = seed_from_beta0(market, prices);
    let mut loads: Vec<f64> = (0..k).map(|j| market.load(j, amounts[j])).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        let mut total: f64 = loads.iter().sum();
        residual = 0.0;
        for j in 0..k {
            let seller = &market.sellers[j];
            let next = if seller.rate > 0.0 {
                let aux = aux_from_w(market, j, total - loads[j]);
                aux.unclamped_demand(prices[j]).clamp(0.0, seller.max_scr)
            } else {
                0.0
            };
            residual = residual.max((next - amounts[j]).abs());
            amounts[j] = next;
            let load = market.load(j, next);
            total += load - loads[j];
            loads[j] = load;
        }
        if residual <= opts.tol {
            return Ok(amounts);
        }
    }
    Err(Error::BestResponseNotConverged {
        sweeps: opts.max_sweeps,
        residual,
        last: amounts,
    })
}

/// `dC_j/dlambda_j` on the interior branch with `w_j` frozen: `-u / (2 lambda^{3/2})`.
pub fn price_derivative(u: f64, price: f64) -> f64 {
    -0.5 * u * price.powf(-1.5)
}

/// One seller's price step.
///
/// On the interior branch this is `eta - C / (b dC/dlambda)`. An unsold
/// provider keeps its price. The result never drops below the price at which
/// the buyer's demand already saturates `max_scr`: undercutting it cannot
/// sell more.
pub fn seller_price_update(amount: f64, price: f64, seller: &Seller, aux: &AuxCoefficients) -> Result<f64> {
    if amount <= 0.0 {
        return Ok(price);
    }
    if aux.u <= 0.0 {
        return Err(Error::DegenerateDemand {
            provider: usize::MAX,
            amount,
        });
    }
    let interior = seller.cost_coeff - amount / (seller.tradeoff_exp * price_derivative(aux.u, price));
    let saturation = (aux.u / (seller.max_scr + aux.v)).powi(2);
    Ok(interior.max(saturation))
}

/// `|C_j + b_j (dC_j/dlambda_j) (lambda_j - eta_j)|`, zero at an interior seller optimum.
pub fn seller_stationarity_residual(market: &Market, amounts: &[f64], prices: &[f64], j: usize) -> f64 {
    let s = &market.sellers[j];
    let aux = aux_coefficients(market, amounts, j);
    (amounts[j] + s.tradeoff_exp * price_derivative(aux.u, prices[j]) * (prices[j] - s.cost_coeff)).abs()
}

/// Seller `j`'s utility if it posted `price` while the other amounts stay put
/// and the buyer re-optimizes only `C_j`.
pub fn seller_response_utility(market: &Market, amounts: &[f64], j: usize, price: f64) -> f64 {
    let s = &market.sellers[j];
    let aux = aux_coefficients(market, amounts, j);
    let demand = if s.rate > 0.0 {
        aux.unclamped_demand(price).clamp(0.0, s.max_scr)
    } else {
        0.0
    };
    seller_utility(price, demand, s.cost_coeff, s.tradeoff_exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub lambda_init: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub inner_tol: f64,
    pub inner_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_init: 0.1,
            tol: 1e-4,
            max_iter: 500,
            inner_tol: 1e-9,
            inner_max: 200,
        }
    }
}

impl SolverConfig {
    fn inner(&self) -> InnerOptions {
        InnerOptions {
            tol: self.inner_tol,
            max_sweeps: self.inner_max,
        }
    }
}

/// State of the game after iteration `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub prices: Vec<f64>,
    pub amounts: Vec<f64>,
    pub beta0: f64,
    pub buyer_utility: f64,
    pub seller_utilities: Vec<f64>,
}

impl TraceRow {
    fn new(market: &Market, t: usize, prices: &[f64], amounts: &[f64]) -> Self {
        Self {
            t,
            prices: prices.to_vec(),
            amounts: amounts.to_vec(),
            beta0: market.beta0(amounts),
            buyer_utility: buyer_utility(market, amounts, prices),
            seller_utilities: seller_utilities(market, amounts, prices),
        }
    }
}

fn seller_utilities(market: &Market, amounts: &[f64], prices: &[f64]) -> Vec<f64> {
    market
        .sellers
        .iter()
        .zip(amounts.iter().zip(prices))
        .map(|(s, (&c, &p))| seller_utility(p, c, s.cost_coeff, s.tradeoff_exp))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub prices: Vec<f64>,
    /// The buyer's best response to `prices`.
    pub amounts: Vec<f64>,
    pub split: LoadSplit,
    pub buyer_utility: f64,
    pub seller_utilities: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Larger of the last price and amount steps (infinity norm).
    pub residual: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl Equilibrium {
    /// One CSV row per iteration: `t, lambda_1..K, c_1..K, beta0, u_c, u_1..K`.
    pub fn write_trace_csv(&self, out: impl Write) -> Result<()> {
        write_trace_csv(&self.trace, self.prices.len(), out)
    }
}

pub fn write_trace_csv(trace: &[TraceRow], k: usize, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=k).map(|j| format!("lambda_{j}")));
    header.extend((1..=k).map(|j| format!("c_{j}")));
    header.push("beta0".into());
    header.push("u_c".into());
    header.extend((1..=k).map(|j| format!("u_{j}")));
    w.write_record(&header)?;
    for row in trace {
        let mut rec = vec![row.t.to_string()];
        rec.extend(row.prices.iter().map(f64::to_string));
        rec.extend(row.amounts.iter().map(f64::to_string));
        rec.push(row.beta0.to_string());
        rec.push(row.buyer_utility.to_string());
        rec.extend(row.seller_utilities.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the alternating buyer/seller iteration from a uniform initial price.
pub fn solve_equilibrium(market: &Market, config: &SolverConfig) -> Result<Equilibrium> {
    let init = vec![config.lambda_init; market.len()];
    solve_equilibrium_from(market, &init, config)
}

/// Alternates the buyer's best response and every seller's price step until
/// both the prices and the amounts move by less than `config.tol`, or
/// `config.max_iter` iterations elapse (then `converged` is false).
pub fn solve_equilibrium_from(market: &Market, init: &[f64], config: &SolverConfig) -> Result<Equilibrium> {
    if init.len() != market.len() {
        return Err(invalid("lambda_init", "one initial price per seller is required"));
    }
    for &p in init {
        ensure_positive("lambda_init", p)?;
    }
    ensure_positive("tol", config.tol)?;
    if config.max_iter == 0 {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    let inner = config.inner();
    let mut prices = init.to_vec();
    let mut amounts = vec![0.0; market.len()];
    let mut trace = vec![TraceRow::new(market, 0, &prices, &amounts)];
    let mut converged = false;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for t in 1..=config.max_iter {
        let next_amounts = buyer_best_response(market, &prices, inner)?;
        let next_prices = (0..market.len())
            .map(|j| {
                let aux = aux_coefficients(market, &next_amounts, j);
                seller_price_update(next_amounts[j], prices[j], &market.sellers[j], &aux).map_err(|e| match e {
                    Error::DegenerateDemand { amount, .. } => Error::DegenerateDemand { provider: j, amount },
                    e => e,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let price_step = max_abs_diff(&next_prices, &prices);
        let amount_step = max_abs_diff(&next_amounts, &amounts);
        prices = next_prices;
        amounts = next_amounts;
        trace.push(TraceRow::new(market, t, &prices, &amounts));
        iterations = t;
        residual = price_step.max(amount_step);
        if price_step < config.tol && amount_step < config.tol {
            converged = true;
            break;
        }
    }

    let amounts = buyer_best_response(market, &prices, inner)?;
    Ok(Equilibrium {
        split: market.split(&amounts),
        buyer_utility: buyer_utility(market, &amounts, &prices),
        seller_utilities: seller_utilities(market, &amounts, &prices),
        prices,
        amounts,
        iterations,
        converged,
        residual,
        trace,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
