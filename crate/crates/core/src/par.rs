//! Chunked map with a fixed chunk size.
//!
//! Work is split into chunks whose boundaries depend only on the input
//! length, never on the thread count, and results come back in chunk order.
//! Reductions over the returned vector are therefore bit-identical between
//! [`Execution::Parallel`] and [`Execution::Sequential`].

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon global pool. Falls back to sequential when the crate
    /// is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Applies `f` to consecutive chunks of `items` (each at most `chunk` long)
/// and returns the per-chunk results in order. `f` also receives the index
/// of the chunk's first element.
pub fn map_chunks<T, R, F>(exec: Execution, items: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items
            .par_chunks(chunk)
            .enumerate()
            .map(|(i, c)| f(i * chunk, c))
            .collect();
    }
    let _ = exec;
    items.chunks(chunk).enumerate().map(|(i, c)| f(i * chunk, c)).collect()
}

/// Index-range flavour of [`map_chunks`] for loops over `0..n`.
pub fn map_ranges<R, F>(exec: Execution, n: usize, chunk: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    let starts: Vec<usize> = (0..n).step_by(chunk).collect();
    map_chunks(exec, &starts, 1, |_, s| {
        let start = s[0];
        f(start..(start + chunk).min(n))
    })
}
