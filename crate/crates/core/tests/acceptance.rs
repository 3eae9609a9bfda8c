//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p mgrid --test acceptance`.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mgrid::harness::{self, ExperimentConfig};
use mgrid::partition::{multi_beta0, multi_beta_j, single_rp_makespan, single_rp_split, time_saved_multi, time_saved_single};
use mgrid::rb_sched::RbPolicy;
use mgrid::spg::{
    buyer_best_response, buyer_gradient, buyer_utility, seller_response_utility, seller_stationarity_residual,
    seller_utility, solve_equilibrium, InnerOptions, Market, Seller, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_market(rng: &mut ChaCha8Rng, k: usize) -> Market {
    let sellers = (0..k)
        .map(|_| Seller {
            rate: rng.random_range(1.0..50.0),
            max_scr: rng.random_range(0.5..10.0),
            cost_coeff: rng.random_range(0.01..0.2),
            tradeoff_exp: 1.0,
        })
        .collect();
    Market::new(
        rng.random_range(20.0..200.0),
        rng.random_range(1.0..200.0),
        rng.random_range(1.0..10.0),
        sellers,
    )
    .unwrap()
}

/// Best point of a uniform grid with `n` points per axis over `[lo, hi]`.
fn grid_argmax(market: &Market, prices: &[f64], lo: &[f64], hi: &[f64], n: usize) -> Vec<f64> {
    let k = lo.len();
    let axis = |d: usize, i: usize| lo[d] + (hi[d] - lo[d]) * i as f64 / (n - 1) as f64;
    let mut best = (f64::NEG_INFINITY, vec![0.0; k]);
    let mut idx = vec![0usize; k];
    let mut point = vec![0.0; k];
    loop {
        for d in 0..k {
            point[d] = axis(d, idx[d]);
        }
        let u = buyer_utility(market, &point, prices);
        if u > best.0 {
            best = (u, point.clone());
        }
        let mut d = 0;
        while d < k {
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == k {
            return best.1;
        }
    }
}

fn best_response_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 50;
    let mut worst = 0.0f64;
    let (mut failures, mut oracle_worse) = (0, 0);
    for i in 0..200 {
        let k = 1 + i % 3;
        let market = random_market(&mut rng, k);
        let prices: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..2.0)).collect();
        let br = buyer_best_response(&market, &prices, InnerOptions::default()).unwrap();

        let caps = market.capacities();
        let zeros = vec![0.0; k];
        let coarse = grid_argmax(&market, &prices, &zeros, &caps, n);
        let cell: Vec<f64> = caps.iter().map(|c| c / (n - 1) as f64).collect();
        let lo: Vec<f64> = (0..k).map(|d| (coarse[d] - cell[d]).max(0.0)).collect();
        let hi: Vec<f64> = (0..k).map(|d| (coarse[d] + cell[d]).min(caps[d])).collect();
        let fine = grid_argmax(&market, &prices, &lo, &hi, n);
        let ok = (0..k).all(|d| {
            let fine_cell = (hi[d] - lo[d]) / (n - 1) as f64;
            let err = (br[d] - fine[d]).abs();
            worst = worst.max(if fine_cell > 0.0 { err / fine_cell } else { 0.0 });
            err <= fine_cell * (1.0 + 1e-9) + 1e-12
        });
        if !ok {
            failures += 1;
            if buyer_utility(&market, &br, &prices) >= buyer_utility(&market, &fine, &prices) {
                oracle_worse += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 60.0,
        format!(
            "200 instances, {failures} mismatches (grid point has lower U_c in {oracle_worse} of them), \
             worst error {worst:.3} refined cells, {secs:.1} s"
        ),
    )
}

fn gradient_and_concavity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel = 0.0f64;
    let mut worst_second = f64::NEG_INFINITY;
    for _ in 0..500 {
        let k = rng.random_range(1..=6);
        let market = random_market(&mut rng, k);
        let caps = market.capacities();
        let amounts: Vec<f64> = caps.iter().map(|c| c * rng.random_range(0.05..0.95)).collect();
        let prices: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..2.0)).collect();
        for j in 0..k {
            let h = 1e-5 * amounts[j];
            let mut up = amounts.clone();
            let mut down = amounts.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (buyer_utility(&market, &up, &prices) - buyer_utility(&market, &down, &prices)) / (2.0 * h);
            // compare the marginal time saved; the price term is linear and exact
            let analytic = buyer_gradient(&market, &amounts, &prices, j) + prices[j];
            let rel = ((fd + prices[j]) - analytic).abs() / analytic.abs();
            worst_rel = worst_rel.max(rel);
        }
        // second difference along a random direction
        let dir: Vec<f64> = caps.iter().map(|c| c * rng.random_range(-1.0..1.0)).collect();
        let t = 1e-3;
        let shifted = |s: f64| -> Vec<f64> { amounts.iter().zip(&dir).map(|(a, d)| a + s * d).collect() };
        let (up, down) = (shifted(t), shifted(-t));
        if up.iter().chain(&down).zip(caps.iter().chain(&caps)).all(|(x, c)| *x >= 0.0 && x <= c) {
            let second = buyer_utility(&market, &up, &prices) - 2.0 * buyer_utility(&market, &amounts, &prices)
                + buyer_utility(&market, &down, &prices);
            worst_second = worst_second.max(second);
        }
    }
    outcome(
        worst_rel <= 1e-5 && worst_second <= 1e-8,
        format!("worst gradient rel. error {worst_rel:.2e}, largest second difference {worst_second:.2e}"),
    )
}

fn fuzz_config(rng: &mut ChaCha8Rng) -> (ExperimentConfig, RbPolicy) {
    let mut c = ExperimentConfig::default();
    let s = &mut c.scenario;
    s.n_providers = rng.random_range(1..=12);
    s.computing_volume = rng.random_range(100.0..5000.0);
    s.balance_factor = 10f64.powf(rng.random_range(3.0..7.0));
    s.own_capacity = rng.random_range(2.0..30.0);
    s.target_edge_snr_db = rng.random_range(-5.0..15.0);
    s.pathloss_exponent = rng.random_range(2.0..4.5);
    s.n_rb = rng.random_range(5..=60);
    s.fading = rng.random_bool(0.8);
    s.n_fading_draws = rng.random_range(20..=200);
    s.cost_coeff = rng.random_range(0.005..0.2);
    s.max_scr_min_factor = rng.random_range(0.1..1.0);
    s.max_scr_max_factor = s.max_scr_min_factor + rng.random_range(0.0..2.0);
    let policy = if rng.random_bool(0.5) { RbPolicy::RoundRobin } else { RbPolicy::MaxWeight };
    (c, policy)
}

fn balance_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut converged, mut errors) = (0, 0);
    let (mut worst_balance, mut worst_norm) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (config, policy) = fuzz_config(&mut rng);
        let seed = rng.random();
        let run = match harness::run_pipeline(&config, seed, policy) {
            Ok(run) => run,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        let eq = &run.equilibrium;
        if !eq.converged {
            continue;
        }
        converged += 1;
        let m = &run.market;
        let makespan = eq.split.makespan;
        for r in eq.split.balance_residuals(m.volume, m.data, m.own_capacity, &eq.amounts, &m.rates()).into_iter().flatten() {
            worst_balance = worst_balance.max(r / makespan);
        }
        worst_norm = worst_norm.max(eq.split.normalization_error());
    }
    outcome(
        errors == 0 && worst_balance <= 1e-9 && worst_norm <= 1e-9,
        format!(
            "{converged}/1000 converged, {errors} errors, worst balance {worst_balance:.2e} T_c, worst |sum beta - 1| {worst_norm:.2e}"
        ),
    )
}

fn stationarity() -> Outcome {
    let config = ExperimentConfig::default();
    let solver = SolverConfig { max_iter: 50, ..config.solver };
    let mut converged = 0;
    let (mut worst_residual, mut worst_seller_gain, mut worst_buyer_gain) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for seed in 0..100u64 {
        let run = harness::run_pipeline(&config, seed, config.rb_policy).unwrap();
        let eq = solve_equilibrium(&run.market, &solver).unwrap();
        if !eq.converged {
            continue;
        }
        converged += 1;
        let m = &run.market;
        let (c, p) = (&eq.amounts, &eq.prices);
        let u_c = buyer_utility(m, c, p);
        for j in 0..m.len() {
            let s = &m.sellers[j];
            if c[j] > 0.0 && c[j] < s.max_scr {
                worst_residual = worst_residual.max(seller_stationarity_residual(m, c, p, j) / c[j]);
            }
            let u_j = seller_utility(p[j], c[j], s.cost_coeff, s.tradeoff_exp);
            for f in [0.99, 1.01] {
                let gain = seller_response_utility(m, c, j, p[j] * f) - u_j;
                worst_seller_gain = worst_seller_gain.max(gain);
                let mut dev = c.clone();
                dev[j] *= f;
                if dev[j] <= s.max_scr {
                    worst_buyer_gain = worst_buyer_gain.max(buyer_utility(m, &dev, p) - u_c);
                }
            }
        }
    }
    // same scenarios solved to a tighter tolerance, for reference only
    let tight = SolverConfig { tol: 1e-8, ..config.solver };
    let mut tight_residual = 0.0f64;
    for seed in 0..100u64 {
        let run = harness::run_pipeline(&config, seed, config.rb_policy).unwrap();
        let eq = solve_equilibrium(&run.market, &tight).unwrap();
        for j in 0..run.market.len() {
            let c = eq.amounts[j];
            if eq.converged && c > 0.0 && c < run.market.sellers[j].max_scr {
                tight_residual = tight_residual.max(seller_stationarity_residual(&run.market, &eq.amounts, &eq.prices, j) / c);
            }
        }
    }
    outcome(
        converged >= 95 && worst_residual <= 1e-6 && worst_seller_gain <= 1e-8 && worst_buyer_gain <= 1e-8,
        format!(
            "{converged}/100 converged in <= 50 iterations, worst relative seller residual {worst_residual:.2e}, \
             best deviation gain seller {worst_seller_gain:.2e} buyer {worst_buyer_gain:.2e} \
             (residual at tol 1e-8: {tight_residual:.2e})"
        ),
    )
}

fn sweep_trends() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig::default();
    let result = harness::sweep_rp_count(&config, 3..=12, 500).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut notes = Vec::new();
    let mut pass = secs < 300.0;
    for policy in [RbPolicy::RoundRobin, RbPolicy::MaxWeight] {
        let rows: Vec<_> = (3..=12).map(|k| result.row(k, policy).unwrap()).collect();
        let means: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.spg.mean)).collect();
        notes.push(format!("{} SPG means [{}]", policy.name(), means.join(" ")));
        for w in rows.windows(2) {
            let se = (w[0].spg.se.powi(2) + w[1].spg.se.powi(2)).sqrt();
            if w[1].spg.mean < w[0].spg.mean - se {
                pass = false;
                notes.push(format!("(a) {} drops at K={}", policy.name(), w[1].k));
            }
        }
        for r in &rows {
            if r.spg.mean < r.ese.mean {
                pass = false;
                notes.push(format!("(b) {} ESE above SPG at K={}", policy.name(), r.k));
            }
        }
    }
    let best_gap = (3..=12)
        .map(|k| {
            let rr = result.row(k, RbPolicy::RoundRobin).unwrap();
            let mw = result.row(k, RbPolicy::MaxWeight).unwrap();
            (rr.spg.mean - mw.spg.mean).abs() / (rr.spg.se.powi(2) + mw.spg.se.powi(2)).sqrt()
        })
        .fold(0.0f64, f64::max);
    if best_gap <= 3.0 {
        pass = false;
    }
    notes.push(format!("(c) largest MW-RR gap {best_gap:.1} SE"));
    notes.push(format!("{secs:.1} s"));
    outcome(pass, notes.join("; "))
}

fn closed_forms() -> Outcome {
    let beta = single_rp_split(100.0, 1.0, 10.0, 10.0, 10.0);
    let n = 1_000_000;
    let grid_best = (0..=n)
        .map(|i| i as f64 / n as f64)
        .map(|b| (b, ((1.0 - b) * 100.0 / 10.0).max(single_rp_makespan(b, 100.0, 1.0, 10.0, 10.0))))
        .fold((0.0, f64::INFINITY), |a, x| if x.1 < a.1 { x } else { a })
        .0;
    let grid_ok = (beta - 1.0 / 3.0).abs() <= 1e-15 && (grid_best - beta).abs() <= 1.0 / n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v = rng.random_range(1.0..1e4);
        let gamma = rng.random_range(0.0..1e3);
        let cc = rng.random_range(0.1..100.0);
        let cv = rng.random_range(0.1..100.0);
        let r = rng.random_range(0.1..1e6);
        let single = single_rp_split(v, gamma, cc, cv, r);
        let b0 = multi_beta0(v, gamma * v, cc, &[cv], &[r]);
        let multi = multi_beta_j(b0, v, gamma * v, cc, cv, r);
        let saved_single = time_saved_single(single, v, gamma, cc, cv, r);
        let saved_multi = time_saved_multi(b0, v, cc);
        worst = worst
            .max((single - multi).abs() / single.max(f64::MIN_POSITIVE))
            .max(((1.0 - single) - b0).abs() / b0)
            .max((saved_single - saved_multi).abs() / (v / cc));
    }
    outcome(
        grid_ok && worst <= 1e-12,
        format!("beta* = {beta:.15}, grid minimizer {grid_best:.6}; K=1 worst rel. difference {worst:.2e}"),
    )
}

fn sweep_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("mgrid-acceptance-{}", std::process::id()));
    let run = |name: &str| {
        let out = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_mgrid"))
            .args(["sweep", "--seed", "2024", "--k-range", "3..5", "--trials", "20", "--out"])
            .arg(&out)
            .status()
            .expect("run mgrid");
        (status.success(), out)
    };
    let (ok_a, a) = run("a");
    let (ok_b, b) = run("b");
    let same = ["trials.csv", "aggregate.csv"].iter().all(|f| {
        matches!((fs::read(a.join(f)), fs::read(b.join(f))), (Ok(x), Ok(y)) if x == y && !x.is_empty())
    });
    let _ = fs::remove_dir_all(&dir);
    outcome(ok_a && ok_b && same, format!("two runs, byte-identical CSVs: {same}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 best response matches grid search", best_response_oracle),
        ("2 gradient and concavity", gradient_and_concavity),
        ("3 balance invariant under fuzzing", balance_fuzz),
        ("4 convergence and stationarity", stationarity),
        ("5 provider-count sweep trends", sweep_trends),
        ("6 closed-form cross-checks", closed_forms),
        ("7 sweep determinism", sweep_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
