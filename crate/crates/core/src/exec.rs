//! Execution mode for the per-node loops.
//!
//! With the `parallel` feature (on by default) node loops run on rayon's
//! pool; [`set_mode`] can force the sequential path at runtime. Results are
//! always collected in node order and reduced sequentially, so the numbers do
//! not depend on the schedule.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

static PARALLEL: AtomicBool = AtomicBool::new(cfg!(feature = "parallel"));

pub fn set_mode(mode: ExecMode) {
    PARALLEL.store(
        mode == ExecMode::Parallel && cfg!(feature = "parallel"),
        Ordering::Relaxed,
    );
}

pub fn mode() -> ExecMode {
    if PARALLEL.load(Ordering::Relaxed) {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

/// Caps the global rayon pool. Must run before the pool is first used;
/// later calls are ignored.
pub fn configure_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads.filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// `(0..n).map(f)` collected in order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_range`].
pub fn try_map_range<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}
