//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the kernels below dispatch to rayon
//! once the work is large enough to amortize the split; otherwise, or with the
//! feature disabled, they run as plain iterator loops. [`Exec`] lets callers
//! (benches, tests) pin one path explicitly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items a kernel always runs sequentially.
pub const MIN_PARALLEL_LEN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Exec {
    /// The policy used by the public API: parallel when compiled in and
    /// more than one worker thread is available.
    pub fn auto() -> Self {
        #[cfg(feature = "parallel")]
        {
            if rayon::current_num_threads() > 1 {
                Exec::Parallel
            } else {
                Exec::Sequential
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }

    fn go_parallel(self, len: usize) -> bool {
        match self {
            Exec::Sequential => false,
            #[cfg(feature = "parallel")]
            Exec::Parallel => len >= MIN_PARALLEL_LEN,
        }
    }
}

/// `(0..len).map(f).collect()` under the given policy.
pub fn map_indexed<T, F>(exec: Exec, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if exec.go_parallel(len) {
        #[cfg(feature = "parallel")]
        {
            return (0..len)
                .into_par_iter()
                .with_min_len(MIN_PARALLEL_LEN / 4)
                .map(f)
                .collect();
        }
    }
    (0..len).map(f).collect()
}

/// Writes `f(i)` into `out[i]` for every index.
pub fn fill_indexed<T, F>(exec: Exec, out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if exec.go_parallel(out.len()) {
        #[cfg(feature = "parallel")]
        {
            out.par_iter_mut()
                .with_min_len(MIN_PARALLEL_LEN / 4)
                .enumerate()
                .for_each(|(i, v)| *v = f(i));
            return;
        }
    }
    for (i, v) in out.iter_mut().enumerate() {
        *v = f(i);
    }
}

/// Runs independent jobs (study grids, extrapolation chains) under the policy.
pub fn map_jobs<I, T, F>(exec: Exec, items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.into_par_iter().map(f).collect(),
    }
}
