//! Data-parallel helpers. With the `parallel` feature (on by default) work is
//! spread over a rayon pool; without it every call runs sequentially. Results
//! always come back in input order.

use std::env;

pub const WORKERS_ENV: &str = "LIKEGAME_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Worker count requested through `LIKEGAME_WORKERS`, if set and positive.
pub fn workers_from_env() -> Option<usize> {
    env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Maps `f` over `items`, preserving order.
pub fn map_indexed<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let _ = exec;
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<U, F>(n: usize, exec: Execution, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Runs `f` on a dedicated pool of `workers` threads. A single worker, or a
/// build without the `parallel` feature, runs `f` on the calling thread.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce(Execution) -> R + Send,
{
    match workers {
        Some(1) => f(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| f(Execution::Parallel)),
            Err(_) => f(Execution::Sequential),
        },
        _ => f(Execution::Parallel),
    }
}
