//! Execution strategy: data-parallel map with a sequential fallback.
//!
//! Everything in this crate that fans out over independent work items —
//! pointer-sample shards, ordering runs, sweep cases — funnels through
//! [`map_indexed`]. With the default `parallel` feature the map runs on the
//! rayon thread pool; without it the same call compiles to a plain sequential
//! loop. Results are collected in index order either way, so outputs are
//! identical across both builds.

/// Apply `f` to `0..n` and collect the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Apply `f` to `0..n` and collect the results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Always-sequential variant, kept available in parallel builds so the two
/// strategies can be benchmarked against each other.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
