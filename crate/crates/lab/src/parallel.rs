//! Thread-pool drivers. Results never depend on the number of threads.

use distortion_core::election::{assemble_report, DistortionReport, Election};
use distortion_core::search::{
    merge_restarts, run_restart, RestartOutcome, SearchConfig, SearchResult,
};
use distortion_core::{Instance, Result};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable capping the worker count; `0` or unset means one per core.
pub const THREADS_VAR: &str = "DISTORTION_LAB_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

pub fn pool(threads: usize) -> ThreadPool {
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction")
}

/// Pool sized by [`THREADS_VAR`].
pub fn default_pool() -> ThreadPool {
    pool(thread_count())
}

/// Same report as the sequential version: rows run concurrently, the sum is taken in order.
pub fn par_expected_distortion(pool: &ThreadPool, instance: &Instance) -> DistortionReport {
    let election = Election::new(instance);
    let rows: Vec<_> = pool.install(|| {
        (0..instance.len())
            .into_par_iter()
            .map(|i| election.outcome_row(i))
            .collect()
    });
    assemble_report(
        instance.candidates().as_slice(),
        election.costs().to_vec(),
        rows.into_iter().flatten().collect(),
    )
}

/// Every restart of `config`, in restart order.
pub fn par_restarts(pool: &ThreadPool, config: &SearchConfig) -> Result<Vec<RestartOutcome>> {
    config.validate()?;
    pool.install(|| {
        (0..config.restarts)
            .into_par_iter()
            .map(|k| run_restart(config, k))
            .collect()
    })
}

pub fn par_search(pool: &ThreadPool, config: &SearchConfig) -> Result<SearchResult> {
    Ok(merge_restarts(config.space, par_restarts(pool, config)?))
}
