//! Data-parallel primitives.
//!
//! Every hot loop in the crate goes through the handful of helpers here. With
//! the `parallel` feature (default) they dispatch to rayon; without it they
//! run the same closures sequentially. Reductions use fixed-size chunks so
//! that floating-point results are bit-identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for deterministic reductions.
const REDUCE_CHUNK: usize = 4096;

/// Evaluates `f(i)` for `i in 0..n` and collects the results in order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps a slice element-wise into a new vector.
pub fn map_slice<T, U, F>(data: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.iter().map(f).collect()
    }
}

/// Applies `f` to each element together with its index.
pub fn for_each_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}

/// Applies `f` to consecutive chunks of length `chunk` (the last may be shorter).
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partials = map_range(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Maximum of `f(i)` over `0..n`; `f64::NEG_INFINITY` when `n == 0`.
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partials = map_range(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        (lo..hi).map(&f).fold(f64::NEG_INFINITY, f64::max)
    });
    partials.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Index and value of the first maximum of `f(i)` over `0..n`.
pub fn argmax_range<F>(n: usize, f: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partials = map_range(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        let mut best: Option<(usize, f64)> = None;
        for i in lo..hi {
            let v = f(i);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best
    });
    partials
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, b)) if b >= v => acc,
            _ => Some((i, v)),
        })
}

/// Runs two closures, potentially in parallel.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reductions_match_sequential() {
        let n = 10_007;
        let s = sum_range(n, |i| (i as f64).sqrt());
        let chunked: f64 = (0..n)
            .collect::<Vec<_>>()
            .chunks(REDUCE_CHUNK)
            .map(|c| c.iter().map(|&i| (i as f64).sqrt()).sum::<f64>())
            .sum();
        assert_eq!(s, chunked);
        assert_eq!(max_range(n, |i| -((i as f64) - 17.0).abs()), 0.0);
        assert_eq!(argmax_range(n, |i| -((i as f64) - 17.0).abs()), Some((17, 0.0)));
        assert_eq!(max_range(0, |_| 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn argmax_prefers_first_on_ties() {
        assert_eq!(argmax_range(10_000, |_| 1.0), Some((0, 1.0)));
    }
}
