//! Grid execution. Every cell is an independent pure computation, so results do
//! not depend on the execution strategy or thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Data-parallel over cells. `threads: None` uses the global pool. Without
    /// the `parallel` feature this runs sequentially.
    #[default]
    Parallel,
    ParallelWith { threads: usize },
}

/// Applies `f` to every item, returning results in input order.
pub fn map_cells<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        Execution::Parallel => parallel_map(items, None, f),
        Execution::ParallelWith { threads } => parallel_map(items, Some(threads), f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        None => items.par_iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
            Err(_) => items.iter().map(f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: &[T], _threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
