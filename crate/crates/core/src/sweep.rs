//! Order-preserving maps over parameter grids.
//!
//! With the `parallel` feature (on by default) [`map`] fans out over a rayon
//! pool; without it, it is the same loop as [`map_sequential`]. Results are
//! always returned in input order, so downstream reductions are
//! deterministic regardless of scheduling.

/// Environment variable that caps the number of worker threads.
pub const THREADS_ENV: &str = "SOLVEGEO_THREADS";

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

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
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_sequential(items, f)
}

/// Configures the global pool from [`THREADS_ENV`]. Returns the thread count
/// that will be used. Calling it more than once is harmless.
pub fn init_threads_from_env() -> usize {
    let requested = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    init_threads(requested)
}

#[cfg(feature = "parallel")]
pub fn init_threads(requested: Option<usize>) -> usize {
    if let Some(n) = requested.filter(|n| *n > 0) {
        // Fails only if the pool was already built, in which case the
        // existing pool is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
pub fn init_threads(_requested: Option<usize>) -> usize {
    1
}

/// Evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` evenly spaced points on the open interval `(lo, hi)`, with the
/// endpoints pulled in by `inset`.
pub fn open_grid(lo: f64, hi: f64, n: usize, inset: f64) -> Vec<f64> {
    linspace(lo + inset, hi - inset, n)
}
