//! Deterministic parallel job execution. Jobs are pure functions of their
//! own seeded inputs; results are collected in job-index order, so output
//! is identical at any worker count (including 1). Worker threads only
//! decide *when* a job runs, never *what* it computes.

use rayon::prelude::*;

use crate::error::{CliError, Result};

pub fn run_jobs<J, T, F>(jobs: &[J], parallel: usize, f: F) -> Result<Vec<T>>
where
    J: Sync,
    T: Send,
    F: Fn(&J) -> Result<T> + Sync,
{
    if parallel <= 1 {
        return jobs.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| CliError::config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(|j| f(j)).collect())
}
