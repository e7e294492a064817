//! Execution policy for the data-parallel kernels.
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] silently runs
//! the sequential path, so callers never need their own `cfg` gates.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows handed to one rayon task at minimum; keeps tiny images off the pool.
#[cfg(feature = "parallel")]
const MIN_ROWS_PER_TASK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when this policy will actually fan out onto rayon.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Fill `out` one row at a time. `row_fn(y, row)` must only write `row`.
    pub fn for_each_row<F>(self, out: &mut [f64], width: usize, row_fn: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        debug_assert!(width > 0 && out.len() % width == 0);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_chunks_mut(width)
                .with_min_len(MIN_ROWS_PER_TASK)
                .enumerate()
                .for_each(|(y, row)| row_fn(y, row));
            return;
        }
        out.chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| row_fn(y, row));
    }

    /// Evaluate `f` on `0..n`, preserving index order in the result.
    pub fn map_indices<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}
