//! Work distribution helpers.
//!
//! All heavy loops (sequence enumeration, Monte Carlo replication) run
//! through these functions. With the `parallel` feature they fan out over
//! rayon; without it they run sequentially. Outputs are returned in input
//! order, so any caller that folds them sequentially is bit-identical under
//! both execution modes and for any worker count.

use std::cell::Cell;
use std::ops::Range;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with parallel dispatch disabled on this thread. Used by the
/// benchmark suite to compare both execution modes in one process.
pub fn with_sequential<R>(f: impl FnOnce() -> R) -> R {
    FORCE_SEQUENTIAL.with(|c| c.set(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(false));
    out
}

fn sequential_forced() -> bool {
    FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Map `f` over the chunks of `0..total` of width `chunk` (last chunk may be
/// shorter). Results come back in chunk order.
pub fn map_chunks<A, F>(total: u64, chunk: u64, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(Range<u64>) -> A + Sync + Send,
{
    assert!(chunk > 0);
    let n_chunks = total.div_ceil(chunk);
    let range_of = |i: u64| (i * chunk)..((i + 1) * chunk).min(total);
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            return (0..n_chunks)
                .into_par_iter()
                .map(|i| f(range_of(i)))
                .collect();
        }
    }
    (0..n_chunks).map(|i| f(range_of(i))).collect()
}

/// Map `f` over `0..count`, preserving order.
pub fn map_indexed<A, F>(count: usize, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(usize) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_forced() {
            use rayon::prelude::*;
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_cover() {
        let v = map_chunks(10, 3, |r| r.sum::<u64>());
        assert_eq!(v, vec![3, 12, 21, 9]);
        assert_eq!(v.iter().sum::<u64>(), 45);
    }

    #[test]
    fn sequential_matches_parallel() {
        let a = map_indexed(100, |i| i * i);
        let b = with_sequential(|| map_indexed(100, |i| i * i));
        assert_eq!(a, b);
    }
}
