//! Row-major index helpers and separable DFTs over `n^j` tensors.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Number of entries of a `j`-dimensional cube with side `n`.
pub fn cube_len(n: usize, j: usize) -> usize {
    n.pow(j as u32)
}

/// Flat offset of `idx` in a row-major cube of side `n`; the first axis is slowest.
pub fn flat_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Inverse of [`flat_index`]; writes into `out`.
pub fn unflatten(mut flat: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

/// Advance `idx` to the next multi-index of an `n`-cube; returns false after the last one.
pub fn next_index(idx: &mut [usize], n: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

/// In-place unnormalized DFT along every axis of a `j`-cube of side `n`.
///
/// `Forward` uses `exp(-2 pi i k t / n)`. `Inverse` uses the conjugate kernel and
/// does not divide by `n^j`.
pub fn dft_cube(data: &mut [Complex64], n: usize, j: usize, direction: FftDirection) {
    if j == 0 || n <= 1 {
        return;
    }
    let shape = vec![n; j];
    for axis in 0..j {
        dft_axis(data, &shape, axis, direction);
    }
}

/// In-place unnormalized DFT along one axis of a row-major array with the given shape.
pub fn dft_axis(data: &mut [Complex64], shape: &[usize], axis: usize, direction: FftDirection) {
    let n = shape[axis];
    if n <= 1 {
        return;
    }
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    let stride: usize = shape[axis + 1..].iter().product();
    let block = stride * n;
    let fft = FftPlanner::new().plan_fft(n, direction);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for base in (0..data.len()).step_by(block) {
        for off in 0..stride {
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[base + off + k * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (k, v) in line.iter().enumerate() {
                data[base + off + k * stride] = *v;
            }
        }
    }
}

/// Signed representative of `i` modulo `n`, in `[-n/2, n/2)`.
pub fn signed_mod(i: usize, n: usize) -> isize {
    let i = (i % n) as isize;
    let n = n as isize;
    if i >= (n + 1) / 2 {
        i - n
    } else {
        i
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_roundtrip() {
        let mut idx = [0usize; 3];
        for f in 0..64 {
            unflatten(f, 4, &mut idx);
            assert_eq!(flat_index(&idx, 4), f);
        }
    }

    #[test]
    fn next_index_visits_in_flat_order() {
        let mut idx = [0usize; 2];
        let mut count = 1;
        while next_index(&mut idx, 3) {
            assert_eq!(flat_index(&idx, 3), count);
            count += 1;
        }
        assert_eq!(count, 9);
    }

    #[test]
    fn dft_cube_matches_naive_2d() {
        let n = 5;
        let data: Vec<Complex64> = (0..25).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut fast = data.clone();
        dft_cube(&mut fast, n, 2, FftDirection::Forward);
        for k1 in 0..n {
            for k2 in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for t1 in 0..n {
                    for t2 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k1 * t1 + k2 * t2) as f64) / n as f64;
                        acc += data[t1 * n + t2] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - fast[k1 * n + k2]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn signed_mod_ranges() {
        assert_eq!(signed_mod(0, 8), 0);
        assert_eq!(signed_mod(3, 8), 3);
        assert_eq!(signed_mod(4, 8), -4);
        assert_eq!(signed_mod(7, 8), -1);
        assert_eq!(signed_mod(2, 5), 2);
        assert_eq!(signed_mod(3, 5), -2);
    }

    #[test]
    fn axis_dft_matches_naive() {
        let shape = [3, 4];
        let data: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, (i * i % 5) as f64)).collect();
        let mut got = data.clone();
        dft_axis(&mut got, &shape, 1, FftDirection::Forward);
        for r in 0..3 {
            for k in 0..4 {
                let e: Complex64 = (0..4)
                    .map(|t| {
                        data[r * 4 + t] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * t) as f64 / 4.0)
                    })
                    .sum();
                assert!((got[r * 4 + k] - e).norm() < 1e-12);
            }
        }
    }
}
