//! Data-parallel map over independent work items.
//!
//! With the `parallel` feature the items are distributed over a rayon pool,
//! otherwise they run in order on the calling thread. Results keep input order
//! either way.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    use rayon::prelude::*;
    if threads == 1 || items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::numerical(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], _threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Thread count from an explicit request, then `SRL_THREADS`, then auto (0).
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("SRL_THREADS").ok()?.trim().parse().ok())
        .unwrap_or(0)
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
