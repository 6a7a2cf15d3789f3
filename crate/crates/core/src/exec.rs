//! Sequential and rayon-backed execution of the data-parallel kernels.
//!
//! Kernels take an [`Exec`] so that both paths stay callable (and comparable)
//! from a single build. When the crate is built without the `parallel`
//! feature, [`Exec::Parallel`] silently degrades to sequential execution.
//!
//! Reductions never rely on rayon's dynamic splitting: inputs are cut into
//! fixed-size chunks, partial results are collected in chunk order and summed
//! sequentially, so the result does not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for elementwise kernels and deterministic reductions.
pub const CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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
    /// Whether this strategy actually runs on the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Applies `f(offset, chunk)` to consecutive `chunk`-sized pieces of `data`.
pub fn for_each_chunk_mut<T, F>(exec: Exec, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i * chunk, c));
}

/// Like [`for_each_chunk_mut`] over two equally long slices in lockstep.
pub fn zip_chunks_mut<A, B, F>(exec: Exec, a: &mut [A], b: &mut [B], chunk: usize, f: F)
where
    A: Send,
    B: Send,
    F: Fn(&mut [A], &mut [B]) + Sync + Send,
{
    debug_assert_eq!(a.len(), b.len());
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        a.par_chunks_mut(chunk)
            .zip(b.par_chunks_mut(chunk))
            .for_each(|(x, y)| f(x, y));
        return;
    }
    let _ = exec;
    a.chunks_mut(chunk)
        .zip(b.chunks_mut(chunk))
        .for_each(|(x, y)| f(x, y));
}

/// Evaluates `f(i)` for `i in 0..n`, preserving order.
pub fn map_indices<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Deterministic sum of `f(offset, chunk)` over fixed `CHUNK`-sized pieces.
pub fn chunked_sum<T, F>(exec: Exec, data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &[T]) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && data.len() > CHUNK {
        let partials: Vec<f64> = data
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(i, c)| f(i * CHUNK, c))
            .collect();
        return partials.iter().sum();
    }
    let _ = exec;
    data.chunks(CHUNK)
        .enumerate()
        .map(|(i, c)| f(i * CHUNK, c))
        .sum()
}

/// Deterministic sum of `f(i)` over `0..n` with per-chunk partials.
pub fn index_sum<F>(exec: Exec, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = |c: usize| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(n);
        (start..end).map(&f).sum::<f64>()
    };
    map_indices(exec, chunks, partial).iter().sum()
}
