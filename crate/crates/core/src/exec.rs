//! Data-parallel evaluation with a sequential fallback.
//!
//! With the `parallel` feature (on by default) independent work items are
//! spread over the rayon thread pool; without it, or when
//! [`Execution::Sequential`] is requested, they run in order on the calling
//! thread. Results are always returned in input order, so exact reductions
//! over them are deterministic either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// First item (in input order) for which `f` returns `Some`.
    pub fn find_map_first<T, R, F>(self, items: &[T], f: F) -> Option<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Option<R> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().find_map_first(f),
            _ => items.iter().find_map(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = Execution::Sequential.map(&items, |x| x * x);
        let par = Execution::Parallel.map(&items, |x| x * x);
        assert_eq!(seq, par);
        let first = |x: &u64| (x % 97 == 96).then_some(*x);
        assert_eq!(Execution::Parallel.find_map_first(&items, first), Some(96));
        assert_eq!(Execution::Sequential.find_map_first(&items, first), Some(96));
    }
}
