//! Divisible-load scheduling in a mobile grid, priced by a Stackelberg game.
//!
//! A resource consumer splits a divisible task between itself and nearby
//! mobile resource providers. Providers sell sharable compute at a unit
//! price; the consumer buys the amounts that best trade saved time against
//! payment, and the load is split so every branch finishes together.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: tasks, providers, scenarios and their seeded generation
//! - [`channel`]: pathloss, Rayleigh fading and achievable rates
//! - [`rb_sched`]: round-robin and MaxWeight resource-block schedulers
//! - [`partition`]: closed-form load splits and makespans
//! - [`spg`]: the pricing game and its fixed-point solver
//! - [`baseline`]: equal-share and nonparallel reference policies
//! - [`harness`]: seeded trials, provider-count sweeps and result files
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```bash
//! cargo run --release -p mgrid --example equilibrium
//! ```

// `!(x >= 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod channel;
pub mod error;
pub mod harness;
pub mod model;
pub mod partition;
pub mod rb_sched;
pub mod spg;

pub use error::{Error, Result};
pub use harness::{ExperimentConfig, TrialResult};
pub use model::{build_scenario, Scenario, ScenarioConfig};
pub use spg::{solve_equilibrium, Equilibrium, Market, SolverConfig};
