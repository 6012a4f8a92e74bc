//! Ordered batch map over independent work items.
//!
//! With the `parallel` feature the items are distributed over a rayon pool;
//! without it (or with `threads == 1`) they run in a plain loop. Output order
//! always matches input order.

/// Maps `f` over `items` using up to `threads` workers (`0` = all cores).
#[cfg(feature = "parallel")]
pub fn map_ordered<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    if threads == 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("rayon thread pool");
    pool.install(|| items.par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, R, F>(items: &[T], _threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Whether this build can actually run work items concurrently.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
