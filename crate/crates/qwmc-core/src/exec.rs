//! Data-parallel execution helpers with a sequential fallback.
//!
//! Work is always split at fixed chunk boundaries and combined in chunk
//! order, so every helper returns bit-identical results whether the
//! `parallel` feature is enabled or not and regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for reductions and shot batches.
pub(crate) const CHUNK: usize = 1 << 14;

/// Smallest slice worth scattering across threads.
#[cfg(feature = "parallel")]
const PAR_MIN_LEN: usize = 1 << 12;

/// Applies `f` to consecutive chunks of `data`; `f` receives the chunk
/// index alongside the chunk.
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    #[cfg(feature = "parallel")]
    if data.len() >= PAR_MIN_LEN && data.len() > chunk_len {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, chunk)| f(i, chunk));
        return;
    }
    for (i, chunk) in data.chunks_mut(chunk_len).enumerate() {
        f(i, chunk);
    }
}

/// Sum of `f` over `data`, accumulated per chunk of [`CHUNK`] elements and
/// then in chunk order.
pub(crate) fn sum_indexed<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &T) -> f64 + Sync,
{
    let partial = |(i, chunk): (usize, &[T])| -> f64 {
        let base = i * CHUNK;
        chunk
            .iter()
            .enumerate()
            .map(|(j, x)| f(base + j, x))
            .sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    if data.len() >= PAR_MIN_LEN {
        let partials: Vec<f64> = data.par_chunks(CHUNK).enumerate().map(partial).collect();
        return partials.into_iter().sum();
    }
    data.chunks(CHUNK).enumerate().map(partial).sum()
}

/// Maps `f` over `count` independent jobs, returning results in job order.
pub(crate) fn map_indexed<R, F>(count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Splits `0..total` into ranges of at most `chunk_len` items and maps `f`
/// over them; results come back in range order.
pub(crate) fn map_ranges<R, F>(total: u64, chunk_len: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64, std::ops::Range<u64>) -> R + Sync,
{
    let n_chunks = total.div_ceil(chunk_len);
    map_indexed(n_chunks as usize, |i| {
        let start = i as u64 * chunk_len;
        let end = (start + chunk_len).min(total);
        f(i as u64, start..end)
    })
}
