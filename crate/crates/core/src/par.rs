//! Batch execution over independent work items.
//!
//! With the `parallel` feature (default) work is spread over a rayon pool;
//! without it every call runs sequentially. Results are always returned in
//! input order, so both paths produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `workers == 0` uses the global pool sized to the machine.
    Parallel { workers: usize },
}

impl Execution {
    /// Parallel when the feature is enabled and `workers != 1`.
    pub fn with_workers(workers: usize) -> Self {
        if cfg!(feature = "parallel") && workers != 1 {
            Execution::Parallel { workers }
        } else {
            Execution::Sequential
        }
    }
}

impl Default for Execution {
    fn default() -> Self {
        Execution::with_workers(0)
    }
}

pub fn map_ordered<'a, T, R, F>(items: &'a [T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&'a T) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers: 0 } => items.par_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers } => match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("could not start a {workers}-thread pool ({e}); running sequentially");
                items.iter().map(f).collect()
            }
        },
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel { .. } => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_ordered(&items, Execution::Sequential, |x| x * x);
        for exec in [Execution::default(), Execution::with_workers(3), Execution::Parallel { workers: 2 }] {
            assert_eq!(map_ordered(&items, exec, |x| x * x), seq);
        }
    }
}
