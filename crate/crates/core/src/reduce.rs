//! Order-fixed reductions.
//!
//! Floating-point addition is not associative, so a parallel sum is only
//! reproducible if the combination tree is pinned. Everything that averages
//! over phases collects per-phase values in index order and folds them here.

use std::ops::Add;

use rayon::prelude::*;

/// Balanced binary-tree sum. The split point is always `len / 2`, so the tree
/// depends only on the length of the slice.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    match xs.len() {
        0 => T::default(),
        1 => xs[0],
        2 => xs[0] + xs[1],
        len => {
            let (lo, hi) = xs.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

pub fn pairwise_mean<T>(xs: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default + std::ops::Div<f64, Output = T>,
{
    pairwise_sum(xs) / xs.len().max(1) as f64
}

/// Evaluates `f` on `0..count` in parallel, returning the results in index
/// order.
pub(crate) fn par_collect<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}
