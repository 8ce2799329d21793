//! Thin dispatch layer over rayon. With the `parallel` feature disabled the
//! same entry points run sequentially, so callers never branch on the
//! feature themselves.

/// Fold `items` into accumulators and merge. The fold must be associative
/// up to `merge`; all users here accumulate exact sums, so the result is
/// identical in either mode.
pub fn fold_chunks<T, A>(
    items: &[T],
    make: impl Fn() -> A + Sync,
    fold: impl Fn(A, &T) -> A + Sync,
    merge: impl Fn(A, A) -> A + Sync,
) -> A
where
    T: Sync,
    A: Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items
            .par_chunks(items.len().div_ceil(4 * rayon::current_num_threads()).max(1))
            .map(|chunk| chunk.iter().fold(make(), &fold))
            .reduce_with(&merge)
            .unwrap_or_else(make)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = &merge;
        items.iter().fold(make(), fold)
    }
}

/// Sequential twin of [`fold_chunks`], kept available in every build so the
/// benchmarks can compare both paths and tests can assert they agree.
pub fn fold_chunks_seq<T, A>(
    items: &[T],
    make: impl Fn() -> A,
    fold: impl Fn(A, &T) -> A,
) -> A {
    items.iter().fold(make(), fold)
}
