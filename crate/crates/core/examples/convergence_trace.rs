//! Per-iteration prices and amounts of one default scenario, printed as CSV.
//! Pass a seed as the first argument.

use mgrid::harness::{convergence_trace, ExperimentConfig};

fn main() -> mgrid::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let eq = convergence_trace(&ExperimentConfig::default(), seed)?;
    eq.write_trace_csv(std::io::stdout())?;
    eprintln!("seed {seed}: converged {} in {} iterations", eq.converged, eq.iterations);
    Ok(())
}
