//! Experiment configuration, seeded trial execution, CSV output and the
//! invariant suite.

pub mod config;
pub mod experiments;
pub mod invariants;
pub mod record;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{estimated_space_dim, run_experiment};
pub use invariants::{run_suite, CheckReport};
pub use record::{ExperimentOutput, GroupSummary, Summary, TrialRecord, TrialTable, CSV_VERSION};

use crate::error::{Error, Result};

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "QCONV_WORKERS";

/// Thread pool sized by `QCONV_WORKERS`, then `requested`, then the
/// number of available cores.
pub fn worker_pool(requested: Option<usize>) -> Result<rayon::ThreadPool> {
    let from_env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| Error::Validation(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    let threads = from_env.or(requested).unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))
}
