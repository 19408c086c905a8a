//! Data-parallel map with a sequential fallback.
//!
//! Results always come back in input order, so reductions over them are
//! deterministic regardless of the execution mode.

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
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Sorts descending by absolute value; ties keep their input order.
    pub fn sort_abs_desc(self, v: &mut [f64]) {
        let cmp = |a: &f64, b: &f64| b.abs().total_cmp(&a.abs());
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if v.len() > 1 << 16 => {
                use rayon::prelude::*;
                v.par_sort_by(cmp);
            }
            _ => v.sort_by(cmp),
        }
    }
}
