//! Deterministic fan-out over sample indices.
//!
//! Sample `i` always draws from substream `i` of the caller's stream, so
//! results do not depend on the number of threads.

use crate::error::Result;
use crate::rng::{RngStream, WorkCounters};

/// Default worker count: the available parallelism, or one.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Evaluates `f(i, stream_i)` for `i < n` on `threads` workers and returns
/// the results in index order, with the work of all streams summed.
pub fn map_streams<T, F>(n: usize, threads: usize, rng: &RngStream, f: F) -> Result<(Vec<T>, WorkCounters)>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> Result<T> + Sync,
{
    let threads = threads.clamp(1, n.max(1));
    let chunk = n.div_ceil(threads);
    let run = |lo: usize, hi: usize| -> Result<(Vec<T>, WorkCounters)> {
        let mut out = Vec::with_capacity(hi - lo);
        let mut work = WorkCounters::default();
        for i in lo..hi {
            let mut s = rng.substream(i as u64);
            out.push(f(i, &mut s)?);
            work += s.work;
        }
        Ok((out, work))
    };
    if threads == 1 {
        return run(0, n);
    }
    let parts: Vec<Result<(Vec<T>, WorkCounters)>> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..threads)
            .map(|j| {
                let (lo, hi) = ((j * chunk).min(n), ((j + 1) * chunk).min(n));
                let run = &run;
                sc.spawn(move || run(lo, hi))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(n);
    let mut work = WorkCounters::default();
    for p in parts {
        let (v, w) = p?;
        out.extend(v);
        work += w;
    }
    Ok((out, work))
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}
