//! Deterministic chunked execution.
//!
//! Monte Carlo work is cut into fixed-size chunks. Chunk boundaries
//! depend only on the total sample count, never on thread count, and
//! each chunk seeds its own RNG stream from (seed, chunk index). The
//! chunk results come back as a Vec in chunk order and callers reduce
//! them sequentially, so estimates are bitwise reproducible whether
//! chunks ran on one thread or sixteen.
//!
//! With the `parallel` feature (default) chunks run on a rayon pool;
//! without it the same chunks run in a plain loop. `workers == 1`
//! forces the sequential path even when the feature is on.

/// Samples per chunk. Fixed so that chunk seeds, and therefore every
/// estimate, are independent of worker count and machine.
pub const CHUNK: usize = 4096;

/// Half-open sample range assigned to one chunk.
#[derive(Debug, Clone, Copy)]
pub struct Chunk {
    pub index: usize,
    pub start: usize,
    pub len: usize,
}

/// Chunk layout for `total` samples.
pub fn layout(total: usize) -> Vec<Chunk> {
    (0..total.div_ceil(CHUNK))
        .map(|index| {
            let start = index * CHUNK;
            Chunk {
                index,
                start,
                len: CHUNK.min(total - start),
            }
        })
        .collect()
}

/// Runs `work` over every chunk of `total` samples and returns the
/// per-chunk results in chunk order.
///
/// `workers` = 0 lets the library pick (all cores when parallel is
/// compiled in, otherwise sequential); 1 forces sequential; any other
/// value sizes the thread pool.
pub fn map_chunks<T, F>(total: usize, workers: usize, work: F) -> Vec<T>
where
    F: Fn(Chunk) -> T + Sync + Send,
    T: Send,
{
    let chunks = layout(total);

    #[cfg(feature = "parallel")]
    {
        if workers != 1 {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers) // 0 = one per core
                .build()
                .expect("thread pool construction");
            // par_iter + collect preserves chunk order.
            return pool.install(|| chunks.into_par_iter().map(&work).collect());
        }
    }
    let _ = workers;
    chunks.into_iter().map(work).collect()
}
