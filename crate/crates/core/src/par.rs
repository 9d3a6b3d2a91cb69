//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it the same loops run on the calling thread. Reductions always
//! split the index range into fixed chunks of [`CHUNK`] terms, sum each chunk
//! in ascending order, then combine chunk totals in ascending chunk order.
//! The result is therefore bit-identical across feature settings and thread
//! counts.

use crate::numerics::ComplexSum;
use num_complex::Complex64;

/// Terms per reduction chunk.
pub const CHUNK: usize = 1024;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, evaluated in parallel when enabled.
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

/// `items.iter().map(f).collect()`, evaluated in parallel when enabled.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Deterministic compensated sum of `term(0) + ... + term(n - 1)`.
pub fn sum_range<F>(n: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = ComplexSum::new();
        for k in lo..hi {
            acc.add(term(k));
        }
        acc.value()
    });
    let mut total = ComplexSum::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}

/// Deterministic compensated sum of a slice prefix.
pub fn sum_slice(values: &[Complex64]) -> Complex64 {
    sum_range(values.len(), |k| values[k])
}

/// Real-valued variant of [`sum_range`].
pub fn sum_range_f64<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    sum_range(n, |k| Complex64::new(term(k), 0.0)).re
}

/// Run `f` on a dedicated pool with `threads` workers (1 = sequential).
///
/// Without the `parallel` feature this simply calls `f`.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_is_schedule_independent() {
        let term = |k: usize| Complex64::new(1.0 / (k as f64 + 1.0), (k as f64).sin());
        let n = 10 * CHUNK + 17;
        let a = with_threads(1, || sum_range(n, term));
        let b = with_threads(4, || sum_range(n, term));
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(
            sum_range(0, |_| Complex64::new(1.0, 0.0)),
            Complex64::new(0.0, 0.0)
        );
    }
}
