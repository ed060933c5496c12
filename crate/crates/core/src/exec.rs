//! Execution policy for the data-parallel inner loops.
//!
//! With the `parallel` feature disabled every policy runs sequentially.
//! Reductions always go through [`chunked_sum`], which sums fixed-size chunks
//! and then folds the partials in order, so the floating-point result does not
//! depend on the policy or on the number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for reductions and pointwise maps.
pub const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this policy actually fans out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Runs `f(chunk_index, chunk)` over `data.chunks_mut(chunk)`.
pub fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Maps every chunk of `data` to a value, preserving chunk order.
pub fn map_chunks<T, R, F>(exec: Execution, data: &[T], chunk: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Send + Sync,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return data.par_chunks(chunk).enumerate().map(|(i, c)| f(i, c)).collect();
    }
    let _ = exec;
    data.chunks(chunk).enumerate().map(|(i, c)| f(i, c)).collect()
}

/// Maps independent work items, preserving order. Used for ladder rungs and
/// parameter sweeps.
pub fn map_items<I, R, F>(exec: Execution, items: &[I], f: F) -> Vec<R>
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Deterministic sum of `term(i, x)` over a slice.
pub fn chunked_sum<T, F>(exec: Execution, data: &[T], term: F) -> f64
where
    T: Sync,
    F: Fn(usize, &T) -> f64 + Send + Sync,
{
    let partials = map_chunks(exec, data, CHUNK, |ci, c| {
        let base = ci * CHUNK;
        c.iter().enumerate().map(|(j, x)| term(base + j, x)).sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Deterministic sum of `term(a_i, b_i)` over two equally long slices.
pub fn chunked_sum2<A, B, F>(exec: Execution, a: &[A], b: &[B], term: F) -> f64
where
    A: Sync,
    B: Sync,
    F: Fn(usize, &A, &B) -> f64 + Send + Sync,
{
    debug_assert_eq!(a.len(), b.len());
    chunked_sum(exec, a, |i, x| term(i, x, &b[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_agree_bitwise_across_policies() {
        let data: Vec<f64> = (0..20_000).map(|i| ((i as f64) * 0.37).sin() * 1e3).collect();
        let s = chunked_sum(Execution::Sequential, &data, |_, x| x * x);
        let p = chunked_sum(Execution::Parallel, &data, |_, x| x * x);
        assert_eq!(s.to_bits(), p.to_bits());
    }

    #[test]
    fn chunk_maps_preserve_order() {
        let data: Vec<usize> = (0..10_000).collect();
        let firsts = map_chunks(Execution::Parallel, &data, 1000, |_, c| c[0]);
        assert_eq!(firsts, (0..10).map(|i| i * 1000).collect::<Vec<_>>());
        let mut buf = vec![0usize; 5000];
        for_each_chunk_mut(Execution::Parallel, &mut buf, 7, |i, c| c.iter_mut().for_each(|v| *v = i));
        assert_eq!(buf[6], 0);
        assert_eq!(buf[7], 1);
    }
}
