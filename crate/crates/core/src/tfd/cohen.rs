//! Wigner-Ville distribution, ambiguity functions and Cohen's class.
//!
//! The lag axis is the half-lag `m` with `|m| <= L/4`, folded modulo `F = L/2`.
//! Bin `F/2` therefore carries both `m = L/4` and `m = -L/4`; parameter
//! functions are sampled at the signed representative `-L/4` there.

use num_complex::Complex64;
use rustfft::FftDirection;

use super::{TfdGrid, ZERO};
use crate::error::{contract, Result};
use crate::kernel::VolterraKernel;
use crate::signal::SampledSignal;
use crate::tensor::{dft_axis, signed_mod};

fn lag_bins(length: usize) -> Result<usize> {
    if length < 2 || !length.is_multiple_of(2) {
        return contract("time-frequency grids need an even signal length");
    }
    Ok(length / 2)
}

/// Folded local autocorrelation `K'(n, m mod F) = sum x(n+m) x*(n-m)`, row-major.
fn local_autocorrelation(x: &SampledSignal, f: usize) -> Vec<Complex64> {
    let l = x.len();
    let max_lag = (l / 4) as isize;
    let mut k = vec![ZERO; l * f];
    for n in 0..l {
        let row = &mut k[n * f..(n + 1) * f];
        for m in -max_lag..=max_lag {
            let v = x.at(n as isize + m) * x.at(n as isize - m).conj();
            row[m.rem_euclid(f as isize) as usize] += v;
        }
    }
    k
}

/// `W(n, k) = sum_{|m| <= L/4} x(n+m) x*(n-m) exp(-2 pi i 2 m k / L)` for `k < L/2`.
pub fn wvd(x: &SampledSignal) -> Result<TfdGrid> {
    let l = x.len();
    let f = lag_bins(l)?;
    let mut values = local_autocorrelation(x, f);
    dft_axis(&mut values, &[l, f], 1, FftDirection::Forward);
    TfdGrid::new(l, f, 1.0 / l as f64, values)
}

/// `phi(xi, m)` over doppler bins `xi < L` and folded half-lag bins `m < L/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterFunction {
    length: usize,
    values: Vec<Complex64>,
}

impl ParameterFunction {
    pub fn new(length: usize, values: Vec<Complex64>) -> Result<Self> {
        let f = lag_bins(length)?;
        if values.len() != length * f {
            return contract("parameter function must be L x L/2");
        }
        Ok(Self { length, values })
    }

    /// Built from `phi(xi, m)` with `xi` and `m` signed.
    pub fn from_fn(length: usize, mut phi: impl FnMut(isize, isize) -> Complex64) -> Result<Self> {
        let f = lag_bins(length)?;
        let mut values = Vec::with_capacity(length * f);
        for xi in 0..length {
            for m in 0..f {
                values.push(phi(signed_mod(xi, length), signed_mod(m, f)));
            }
        }
        Self::new(length, values)
    }

    /// `phi = 1`: the Wigner-Ville distribution.
    pub fn wvd(length: usize) -> Result<Self> {
        Self::from_fn(length, |_, _| Complex64::new(1.0, 0.0))
    }

    /// `phi(xi, m) = exp(2 pi i xi m / L)`.
    pub fn rihaczek(length: usize) -> Result<Self> {
        let l = length as f64;
        Self::from_fn(length, |xi, m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (xi * m) as f64 / l))
    }

    /// `phi = conj(A_h)`, giving the spectrogram with window `h`.
    pub fn spectrogram(window: &SampledSignal) -> Result<Self> {
        let a = ambiguity(window)?;
        Ok(Self { length: a.length, values: a.values.iter().map(|v| v.conj()).collect() })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn lag_bins(&self) -> usize {
        self.length / 2
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, xi: usize, m: usize) -> Complex64 {
        self.values[xi * self.lag_bins() + m]
    }
}

/// `A_h(xi, m) = sum_a h(a+m) h*(a-m) exp(-2 pi i xi a / L)`.
pub fn ambiguity(h: &SampledSignal) -> Result<ParameterFunction> {
    let l = h.len();
    let f = lag_bins(l)?;
    let mut values = vec![ZERO; l * f];
    for m in 0..f {
        let ms = signed_mod(m, f);
        for a in 0..l as isize {
            values[a as usize * f + m] = h.at(a + ms) * h.at(a - ms).conj();
        }
    }
    dft_axis(&mut values, &[l, f], 0, FftDirection::Forward);
    ParameterFunction::new(l, values)
}

/// Cohen's class member with parameter function `phi`: the WVD smoothed by
/// `smoothing_kernel(phi)` with a 2-D circular convolution, done by FFT.
pub fn cohen(x: &SampledSignal, phi: &ParameterFunction) -> Result<TfdGrid> {
    if phi.length() != x.len() {
        return contract("parameter function and signal lengths differ");
    }
    let w = wvd(x)?;
    if phi.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)) {
        return Ok(w);
    }
    convolve(&w, &phi.values)
}

fn convolve(w: &TfdGrid, phi: &[Complex64]) -> Result<TfdGrid> {
    let (l, f) = (w.times(), w.bins());
    let shape = [l, f];
    let mut v = w.values().to_vec();
    // back to (doppler, lag): the frequency axis is undone first
    dft_axis(&mut v, &shape, 1, FftDirection::Inverse);
    dft_axis(&mut v, &shape, 0, FftDirection::Inverse);
    let scale = 1.0 / (l * f) as f64;
    for (a, p) in v.iter_mut().zip(phi) {
        *a *= p * scale;
    }
    dft_axis(&mut v, &shape, 0, FftDirection::Forward);
    dft_axis(&mut v, &shape, 1, FftDirection::Forward);
    TfdGrid::new(l, f, w.bin_width(), v)
}

/// `Pi(a, b)` with `cohen(x, phi)(n, k) = sum W(n', k') Pi(n - n', k - k')`.
pub fn smoothing_kernel(phi: &ParameterFunction) -> Result<TfdGrid> {
    let (l, f) = (phi.length(), phi.lag_bins());
    let mut v = phi.values().to_vec();
    dft_axis(&mut v, &[l, f], 0, FftDirection::Forward);
    dft_axis(&mut v, &[l, f], 1, FftDirection::Forward);
    let scale = 1.0 / (l * f) as f64;
    v.iter_mut().for_each(|a| *a *= scale);
    TfdGrid::new(l, f, 1.0 / l as f64, v)
}

/// Order-2 kernel `h` of memory `L` with
/// `cohen(x, phi)(t, bin) = sum_{u,v} h(u, v) x*(t-u) x(t-v)`.
pub fn cohen_volterra_kernel(phi: &ParameterFunction, bin: usize) -> Result<VolterraKernel> {
    let (l, f) = (phi.length(), phi.lag_bins());
    if bin >= f {
        return Err(crate::VolterraError::OutOfGrid { index: vec![bin] });
    }
    // g(a, m) = (1/L) sum_xi phi(xi, m) exp(-2 pi i xi a / L)
    let mut g = phi.values().to_vec();
    dft_axis(&mut g, &[l, f], 0, FftDirection::Forward);
    let scale = 1.0 / l as f64;
    let max_lag = (l / 4) as isize;
    let mut h = VolterraKernel::zeros(2, l);
    let li = l as isize;
    for m in -max_lag..=max_lag {
        let fourier =
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (2 * m * bin as isize) as f64 / l as f64);
        let mf = m.rem_euclid(f as isize) as usize;
        for v in 0..li {
            let u = (v + 2 * m).rem_euclid(li) as usize;
            let a = (v + m).rem_euclid(li) as usize;
            let idx = [u, v as usize];
            let cur = h.get(&idx);
            h.set(&idx, cur + fourier * g[a * f + mf] * scale);
        }
    }
    Ok(h)
}
