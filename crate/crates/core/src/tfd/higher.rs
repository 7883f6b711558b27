//! Higher-order Wigner-Ville distribution over `(t, f_1, .., f_{k-1})`.

use num_complex::Complex64;
use rustfft::FftDirection;

use super::{FractionalDelay, ZERO};
use crate::error::{contract, Result, VolterraError};
use crate::signal::SampledSignal;
use crate::tensor::{cube_len, dft_axis, flat_index, next_index};

/// Largest number of grid entries `howvd` allocates by default.
pub const DEFAULT_BUDGET: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HowvdOptions {
    /// Samples per lag step; `None` means `k`, which keeps every shift integral.
    pub lag_step: Option<usize>,
    pub budget: usize,
}

impl Default for HowvdOptions {
    fn default() -> Self {
        Self { lag_step: None, budget: DEFAULT_BUDGET }
    }
}

/// Row-major `(t, f_1, .., f_{k-1})` values; every frequency axis has `bins` bins.
#[derive(Clone, Debug, PartialEq)]
pub struct HigherOrderGrid {
    order: usize,
    times: usize,
    bins: usize,
    bin_width: f64,
    values: Vec<Complex64>,
}

impl HigherOrderGrid {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn times(&self) -> usize {
        self.times
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, t: usize, f: &[usize]) -> Complex64 {
        let per_row = cube_len(self.bins, self.order - 1);
        self.values[t * per_row + flat_index(f, self.bins)]
    }

    pub fn max_abs(&self) -> f64 {
        crate::signal::max_abs(&self.values)
    }

    /// Frequency tuple of the largest magnitude in row `t`.
    pub fn argmax_abs(&self, t: usize) -> Vec<usize> {
        let per_row = cube_len(self.bins, self.order - 1);
        let row = &self.values[t * per_row..(t + 1) * per_row];
        let best = (0..per_row).fold(0, |b, i| if row[i].norm() > row[b].norm() { i } else { b });
        let mut f = vec![0; self.order - 1];
        crate::tensor::unflatten(best, self.bins, &mut f);
        f
    }
}

/// `sum_tau x*(t - a) prod_r P_{r+1}(x(t + tau_r - a)) exp(-2 pi i f . tau / L)` with
/// `a = sum(tau) / k`, `P` conjugating odd positions, and `tau_r = c m_r` for
/// `|m_r| <= L / (2c)`. Bin `b` stands for `b / L` cycles per sample.
pub fn howvd(x: &SampledSignal, k: usize, opts: HowvdOptions) -> Result<HigherOrderGrid> {
    if !(2..=4).contains(&k) {
        return Err(VolterraError::Unsupported(format!("higher-order WVD of order {k}")));
    }
    let l = x.len();
    let c = opts.lag_step.unwrap_or(k);
    if c == 0 || !l.is_multiple_of(c) {
        return contract("lag step must divide the signal length");
    }
    let f = l / c;
    let dims = k - 1;
    let per_row = f.checked_pow(dims as u32).ok_or_else(|| VolterraError::Resource("grid size overflows".into()))?;
    let total = per_row.checked_mul(l).ok_or_else(|| VolterraError::Resource("grid size overflows".into()))?;
    if total > opts.budget {
        return Err(VolterraError::Resource(format!("{total} grid entries exceed the budget of {}", opts.budget)));
    }
    let max_lag = (f / 2) as isize;
    let side = 2 * max_lag as usize + 1;
    let mut fd = FractionalDelay::new(x);
    let mut values = vec![ZERO; total];
    let mut idx = vec![0usize; dims];
    let mut folded = vec![0usize; dims];
    let mut shifts = vec![0.0; dims];
    loop {
        let lags: Vec<isize> = idx.iter().map(|&i| i as isize - max_lag).collect();
        let alpha = lags.iter().sum::<isize>() as f64 * c as f64 / k as f64;
        for r in 0..dims {
            shifts[r] = (c as isize * lags[r]) as f64 - alpha;
            folded[r] = lags[r].rem_euclid(f as isize) as usize;
            fd.prepare(shifts[r]);
        }
        fd.prepare(-alpha);
        let col = flat_index(&folded, f);
        let base = fd.get(-alpha);
        let factors: Vec<&[Complex64]> = shifts.iter().map(|&d| fd.get(d)).collect();
        for n in 0..l {
            let mut p = base[n].conj();
            for (r, fac) in factors.iter().enumerate() {
                // product position r + 2 is conjugated when odd
                p *= if (r + 2) % 2 == 1 { fac[n].conj() } else { fac[n] };
            }
            values[n * per_row + col] += p;
        }
        if !next_index(&mut idx, side) {
            break;
        }
    }
    let mut shape = vec![f; k];
    shape[0] = l;
    for axis in 1..k {
        dft_axis(&mut values, &shape, axis, FftDirection::Forward);
    }
    Ok(HigherOrderGrid { order: k, times: l, bins: f, bin_width: 1.0 / l as f64, values })
}
