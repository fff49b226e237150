//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon unless
//! the process-wide execution policy has been switched to
//! [`Execution::Sequential`]. Without the feature everything runs sequentially.
//!
//! Every helper produces results in index order and never reduces across
//! workers, so output is bitwise identical for any thread count.

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the helpers stay sequential.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_LEN: usize = 32;

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

/// Selects the execution policy for all subsequent calls.
pub fn set_execution(policy: Execution) {
    SEQUENTIAL.store(policy == Execution::Sequential, Ordering::SeqCst);
}

pub fn execution() -> Execution {
    if cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::SeqCst) {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

#[cfg(feature = "parallel")]
fn use_parallel(len: usize) -> bool {
    len >= MIN_PARALLEL_LEN && execution() == Execution::Parallel
}

/// `(0..len).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if use_parallel(len) {
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if use_parallel(items.len()) {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Calls `f(chunk_index, chunk)` on consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if use_parallel(data.len() / chunk.max(1)) {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}
