//! Parallel sums with an optional fixed association order.

use crate::real::Real;
use rayon::prelude::*;

/// Items per partial sum in deterministic mode. Chunk boundaries depend
/// only on the index range, never on the thread count.
pub const CHUNK: usize = 1024;

#[inline]
fn add<T: Real, const K: usize>(mut a: [T; K], b: [T; K]) -> [T; K] {
    for k in 0..K {
        a[k] += b[k];
    }
    a
}

/// `Σ_{i < n} f(i)` componentwise over `K` fused accumulators.
pub fn sum_k<T, const K: usize, F>(n: usize, deterministic: bool, f: F) -> [T; K]
where
    T: Real,
    F: Fn(usize) -> [T; K] + Sync + Send,
{
    let zero = [T::zero(); K];
    if deterministic {
        let partial: Vec<[T; K]> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| (c * CHUNK..n.min((c + 1) * CHUNK)).fold(zero, |acc, i| add(acc, f(i))))
            .collect();
        partial.into_iter().fold(zero, add)
    } else {
        (0..n).into_par_iter().map(f).reduce(|| zero, add)
    }
}

pub fn sum<T, F>(n: usize, deterministic: bool, f: F) -> T
where
    T: Real,
    F: Fn(usize) -> T + Sync + Send,
{
    sum_k::<T, 1, _>(n, deterministic, |i| [f(i)])[0]
}

/// `max_{i < n} f(i)`, or zero for an empty range.
pub fn max<T, F>(n: usize, f: F) -> T
where
    T: Real,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).reduce(T::zero, |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_sum_is_thread_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e3_f64.powi((i % 7) as i32 - 3);
        let reference = sum(100_000, true, f);
        for threads in [1, 2, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = pool.install(|| sum(100_000, true, f));
            assert_eq!(got.to_bits(), reference.to_bits());
        }
        let exact: f64 = (0..100_000).map(f).sum();
        assert!((reference - exact).abs() <= 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn fused_and_max() {
        let s = sum_k::<f64, 2, _>(10, true, |i| [i as f64, 1.0]);
        assert_eq!(s, [45.0, 10.0]);
        assert_eq!(max(5, |i| (i as f64 - 2.0).abs()), 2.0);
        assert_eq!(max::<f64, _>(0, |_| 1.0), 0.0);
    }
}
