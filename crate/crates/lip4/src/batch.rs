//! Order-preserving batch map over independent work items.
//!
//! With the `parallel` feature (default) [`map`] fans out over the current
//! rayon thread pool; without it both functions are the same sequential
//! loop. [`map_seq`] is always sequential so callers (and the bench suite)
//! can compare the two paths directly.

/// Applies `f` to every item, in parallel when the `parallel` feature is
/// enabled. Results keep the input order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Sequential fallback, always available.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
