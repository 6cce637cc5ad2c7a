//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the indexed maps run on the rayon pool;
//! without it they run sequentially. Results are always collected in index
//! order and reduced sequentially afterwards, so output is bit-identical
//! regardless of feature flags or thread count.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `0..n` through `f`, in parallel when enabled. Order-preserving.
#[cfg(feature = "parallel")]
pub fn map_collect<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `0..n` through `f`, in parallel when enabled. Order-preserving.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    map_collect_seq(n, f)
}

/// Sequential variant, always available (benchmark baseline).
pub fn map_collect_seq<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Sequential left-to-right sum; the deterministic reduction used after every
/// parallel map.
pub fn sum_complex(values: &[Complex64]) -> Complex64 {
    values
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
}

/// Sequential left-to-right sum of real values.
pub fn sum_f64(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let f = |i: usize| {
            let x = i as f64 * 0.1;
            Complex64::new(x.sin(), x.cos())
        };
        let a = map_collect(1000, f);
        let b = map_collect_seq(1000, f);
        assert_eq!(a, b);
        assert_eq!(sum_complex(&a), sum_complex(&b));
    }
}
