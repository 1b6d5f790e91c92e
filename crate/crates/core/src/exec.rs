//! Execution strategy for the data-parallel inner loops.
//!
//! Permutation replicates, benchmark trials and grid evaluations all map an
//! index range through a pure closure; results are collected in index order,
//! so the outcome is identical whichever strategy runs the loop. The
//! `parallel` feature (on by default) backs [`ExecMode::Parallel`] with
//! rayon; without it both modes run sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How an index-mapped loop is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Rayon work-stealing when the `parallel` feature is enabled, otherwise
    /// a sequential fallback.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}
