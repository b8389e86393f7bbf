//! Sequential or rayon-backed execution of independent work items.
//!
//! Everything that fans out (per-block cipher work, attack sweeps, trial
//! loops) goes through [`Exec`], so the same code path can be benchmarked
//! both ways. Without the `parallel` feature, `Exec::Parallel` runs
//! sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Order-preserving map over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Applies `f` to each `chunk`-sized piece of `data` together with the
    /// matching element of `with`, stopping at the first error.
    pub fn try_zip_chunks_mut<T, U, E, F>(self, data: &mut [T], chunk: usize, with: &[U], f: F) -> Result<(), E>
    where
        T: Send,
        U: Sync,
        E: Send,
        F: Fn(&mut [T], &U) -> Result<(), E> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return data
                .par_chunks_mut(chunk)
                .zip(with.par_iter())
                .try_for_each(|(c, u)| f(c, u));
        }
        data.chunks_mut(chunk).zip(with).try_for_each(|(c, u)| f(c, u))
    }
}
