//! Optimal split of a task between the consumer and one provider, checked
//! against a brute-force scan of the makespan.

use mgrid::partition::{single_rp_makespan, single_rp_split, time_saved_single};

fn main() {
    let (volume, gamma, own, provider, rate) = (100.0, 1.0, 10.0, 10.0, 10.0);
    let beta = single_rp_split(volume, gamma, own, provider, rate);
    let makespan = |b: f64| ((1.0 - b) * volume / own).max(single_rp_makespan(b, volume, gamma, provider, rate));

    println!("closed-form beta* = {beta:.6}, makespan {:.4} s", makespan(beta));
    println!("time saved        = {:.4} s of {:.1} s", time_saved_single(beta, volume, gamma, own, provider, rate), volume / own);

    let (best, t) = (0..=10_000)
        .map(|i| i as f64 / 10_000.0)
        .map(|b| (b, makespan(b)))
        .fold((0.0, f64::INFINITY), |a, x| if x.1 < a.1 { x } else { a });
    println!("grid minimizer    = {best:.4}, makespan {t:.4} s");

    println!("\nslower links push work back to the consumer:");
    for r in [1.0, 3.0, 10.0, 30.0, 100.0] {
        println!("  R = {r:>5}: beta* = {:.4}", single_rp_split(volume, gamma, own, provider, r));
    }
}
