//! Data-parallel helpers. With the `parallel` feature these dispatch to rayon
//! when asked to; without it every call runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent work items are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` only if the crate was built with the `parallel` feature.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Evaluates `f(0..len)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
        _ => (0..len).map(f).collect(),
    }
}

/// Runs `f(chunk_index, chunk)` over consecutive `chunk_len` pieces of `data`.
pub fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk_len = chunk_len.max(1);
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => data
            .par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c)),
        _ => data
            .chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c)),
    }
}

/// Sets the global rayon pool size. A no-op without the `parallel` feature.
pub fn configure_workers(workers: usize) {
    #[cfg(feature = "parallel")]
    {
        if workers > 0 {
            // Fails only if the pool already exists, in which case it is kept.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}
