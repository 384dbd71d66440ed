//! Unnormalized Walsh-Hadamard transforms over XOR-indexed arrays.

use std::ops::{Add, Sub};

/// In-place transform `f(m) -> sum_k f(k) (-1)^{popcount(m & k)}`.
///
/// Applying it twice multiplies by `len`. `len` must be a power of two.
pub fn fwht<T: Copy + Add<Output = T> + Sub<Output = T>>(data: &mut [T]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    let mut h = 1;
    while h < n {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// XOR convolution `(f * g)(n) = sum_r f(r) g(r ^ n)`.
pub fn xor_convolve(f: &[f64], g: &[f64]) -> Vec<f64> {
    assert_eq!(f.len(), g.len());
    let mut fh = f.to_vec();
    let mut gh = g.to_vec();
    fwht(&mut fh);
    fwht(&mut gh);
    let scale = 1.0 / f.len() as f64;
    for (a, b) in fh.iter_mut().zip(&gh) {
        *a *= b * scale;
    }
    fwht(&mut fh);
    fh
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn convolution_matches_direct_sum(f in proptest::collection::vec(-1.0f64..1.0, 16),
                                          g in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let fast = xor_convolve(&f, &g);
            for (n, &v) in fast.iter().enumerate() {
                let direct: f64 = (0..16).map(|r| f[r] * g[r ^ n]).sum();
                prop_assert!((v - direct).abs() < 1e-12);
            }
        }

        #[test]
        fn transform_matches_definition(f in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let mut t = f.clone();
            fwht(&mut t);
            for (m, &v) in t.iter().enumerate() {
                let direct: f64 = (0..8)
                    .map(|k| if (m & k).count_ones() % 2 == 0 { f[k] } else { -f[k] })
                    .sum();
                prop_assert!((v - direct).abs() < 1e-12);
            }
        }
    }
}
