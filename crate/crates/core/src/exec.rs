//! Data-parallel helpers with a sequential fallback.
//!
//! Both implementations are order preserving, so callers get identical
//! output with and without the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum items per rayon task; the per-item work here is microseconds
/// (small matrix products and eigensolves), so fine splits cost more than
/// they win.
#[cfg(feature = "parallel")]
const MIN_SPLIT: usize = 64;

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().with_min_len(MIN_SPLIT).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
