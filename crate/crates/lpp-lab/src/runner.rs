//! Deterministic parallel sample execution.
//!
//! Each sample is an independent task keyed by (master_seed, stream id);
//! results are collected in index order, so the aggregate is identical for
//! any thread count. Experiments carve the stream-id space into disjoint
//! blocks (one per sampling role) to keep draws independent.

use lpp_core::RngStream;
use rayon::prelude::*;

/// Width reserved for one sampling role within an experiment.
pub const STREAM_BLOCK: u64 = 1 << 24;

/// Runs `samples` independent tasks and returns their values in index order.
pub fn run_samples<F>(samples: u64, master_seed: u64, stream_base: u64, job: F) -> Vec<f64>
where
    F: Fn(u64, RngStream) -> f64 + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|i| job(i, RngStream::new(master_seed, stream_base + i)))
        .collect()
}

/// Same, for tasks that emit several values per sample.
pub fn run_samples_vec<F>(samples: u64, master_seed: u64, stream_base: u64, job: F) -> Vec<Vec<f64>>
where
    F: Fn(u64, RngStream) -> Vec<f64> + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|i| job(i, RngStream::new(master_seed, stream_base + i)))
        .collect()
}
