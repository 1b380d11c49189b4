//! Sequential or data-parallel evaluation of independent work items.
//!
//! Results always come back in index order, so any reduction done by the
//! caller afterwards is bitwise identical across modes and thread counts.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is on, otherwise sequential.
    #[default]
    Parallel,
}

impl Execution {
    pub fn map_indices<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel => par_map(n, f),
        }
    }

    /// Fallible variant; returns the error of the lowest failing index.
    pub fn try_map_indices<R, E, F>(self, n: usize, f: F) -> Result<Vec<R>, E>
    where
        R: Send,
        E: Send,
        F: Fn(usize) -> Result<R, E> + Sync + Send,
    {
        self.map_indices(n, f).into_iter().collect()
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

#[cfg(feature = "parallel")]
fn par_map<R: Send, F: Fn(usize) -> R + Sync + Send>(n: usize, f: F) -> Vec<R> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<R: Send, F: Fn(usize) -> R + Sync + Send>(n: usize, f: F) -> Vec<R> {
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved() {
        let a = Execution::Parallel.map_indices(1000, |i| (i as f64).sqrt());
        let b = Execution::Sequential.map_indices(1000, |i| (i as f64).sqrt());
        assert_eq!(a, b);
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>, usize> =
            Execution::Parallel.try_map_indices(50, |i| if i % 7 == 3 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(3));
    }
}
