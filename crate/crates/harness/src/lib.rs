//! Experiment harness for the averaging suites: configuration, runs, steady-state
//! statistics, error metrics against benchmarks, CSV output and the acceptance criteria.

pub mod cli;
pub mod config;
pub mod criteria;
mod error;
pub mod io;
pub mod metrics;
pub mod stats;
pub mod suites;

pub use error::{HarnessError, Result};

/// Configures the global worker pool from `OSCAVG_THREADS`, if set.
pub fn init_threads() {
    if let Some(n) = std::env::var("OSCAVG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
