//! Distributed bandit submodular coordination with learned communication
//! neighborhoods, plus sequential-greedy benchmarks and a simulated clock.

pub mod analysis;
pub mod bandit;
pub mod benchmarks;
pub mod coordination;
pub mod error;
pub mod objective;
pub mod rng;
pub mod scenario;
pub mod timing;

pub use error::{Error, Result};
