//! Time-frequency distributions on `Z_L`.
//!
//! Frequency bin `k` of every grid stands for `k / L` cycles per sample, so a pure
//! tone `exp(2 pi i k0 t / L)` peaks at bin `k0` whatever the lag sampling.

mod cohen;
mod higher;
mod pwvd;

pub use cohen::{ambiguity, cohen, cohen_volterra_kernel, smoothing_kernel, wvd, ParameterFunction};
pub use higher::{howvd, HigherOrderGrid, HowvdOptions, DEFAULT_BUDGET};
pub use pwvd::{
    check_lambda_constraints, interference_terms, pwvd, pwvd_lambdas, pwvd_volterra_kernel, KernelPoint, LambdaReport,
    LambdaSet, PwvdKernel, SLICE_TOL,
};

use std::collections::HashMap;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{contract, Result};
use crate::signal::SampledSignal;
use crate::tensor::dft_cube;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Values on a time x frequency grid, row-major (one row per time sample).
#[derive(Clone, Debug, PartialEq)]
pub struct TfdGrid {
    times: usize,
    bins: usize,
    bin_width: f64,
    values: Vec<Complex64>,
}

impl TfdGrid {
    pub fn new(times: usize, bins: usize, bin_width: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != times * bins || times == 0 || bins == 0 {
            return contract("grid dimensions do not match its values");
        }
        Ok(Self { times, bins, bin_width, values })
    }

    pub fn times(&self) -> usize {
        self.times
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Cycles per sample between adjacent bins.
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, t: usize, k: usize) -> Complex64 {
        self.values[t * self.bins + k]
    }

    pub fn row(&self, t: usize) -> &[Complex64] {
        &self.values[t * self.bins..(t + 1) * self.bins]
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.times).map(|t| self.get(t, k)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        crate::signal::max_abs(&self.values)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Bin with the largest real part in row `t`.
    pub fn argmax_real(&self, t: usize) -> usize {
        let row = self.row(t);
        (0..self.bins).fold(0, |best, k| if row[k].re > row[best].re { k } else { best })
    }
}

/// Analytic signal of a real signal: positive bins doubled, DC and Nyquist kept,
/// negative bins zeroed.
pub fn analytic_signal(s: &SampledSignal) -> Result<SampledSignal> {
    if s.samples().iter().any(|v| v.im != 0.0) {
        return contract("the analytic signal is defined for real input");
    }
    let l = s.len();
    let spec = s.dft();
    let mut bins = spec.bins().to_vec();
    for (k, b) in bins.iter_mut().enumerate() {
        if k == 0 || 2 * k == l {
            continue;
        }
        if 2 * k < l {
            *b *= 2.0;
        } else {
            *b = ZERO;
        }
    }
    Ok(crate::signal::Spectrum::new(bins)?.idft())
}

/// Phase `phi(t) = sum_p a_p t^p` in radians, `t` in samples.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialPhase {
    coeffs: Vec<f64>,
}

impl PolynomialPhase {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn phase(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (p, a)| acc * t + p as f64 * a)
    }

    /// `phi'(t) / 2 pi`, cycles per sample.
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.derivative(t) / (2.0 * std::f64::consts::PI)
    }
}

/// `A exp(i phi(t))` for `t = 0..length`.
pub fn chirp(phase: &PolynomialPhase, amplitude: f64, length: usize) -> Result<SampledSignal> {
    SampledSignal::new((0..length).map(|t| Complex64::from_polar(amplitude, phase.phase(t as f64))).collect())
}

/// Mean circular distance between the per-row argmax and the bin nearest the
/// instantaneous frequency, over the rows left after dropping 10% at each edge.
pub fn if_concentration(grid: &TfdGrid, phase: &PolynomialPhase) -> f64 {
    let t_len = grid.times();
    let f = grid.bins() as i64;
    let skip = (t_len as f64 * 0.1).round() as usize;
    let rows: Vec<usize> = (skip..t_len.saturating_sub(skip)).collect();
    if rows.is_empty() {
        return f64::NAN;
    }
    let total: f64 = rows
        .iter()
        .map(|&t| {
            let target = (phase.instantaneous_frequency(t as f64) / grid.bin_width()).round() as i64;
            let d = (grid.argmax_real(t) as i64 - target).rem_euclid(f);
            d.min(f - d) as f64
        })
        .sum();
    total / rows.len() as f64
}

/// Circular shifts `z(n + d)` for real `d`, by spectral phase ramps. Integer
/// shifts are exact reindexing. Exact for signals whose spectrum lies in
/// `[-L/4, 3L/4)`, which covers analytic signals.
pub(crate) struct FractionalDelay {
    samples: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    cache: HashMap<u64, Vec<Complex64>>,
}

impl FractionalDelay {
    pub(crate) fn new(z: &SampledSignal) -> Self {
        Self { samples: z.samples().to_vec(), spectrum: z.dft().bins().to_vec(), cache: HashMap::new() }
    }

    fn len(&self) -> usize {
        self.samples.len()
    }

    pub(crate) fn prepare(&mut self, d: f64) {
        let key = d.to_bits();
        if !self.cache.contains_key(&key) {
            let v = self.compute(d);
            self.cache.insert(key, v);
        }
    }

    /// `z(n + d)` for every `n`; `d` must have been prepared.
    pub(crate) fn get(&self, d: f64) -> &[Complex64] {
        &self.cache[&d.to_bits()]
    }

    #[cfg(test)]
    pub(crate) fn shifted(&mut self, d: f64) -> &[Complex64] {
        self.prepare(d);
        self.get(d)
    }

    fn compute(&self, d: f64) -> Vec<Complex64> {
        let l = self.len();
        if d.fract() == 0.0 {
            let s = d as i64;
            return (0..l as i64).map(|n| self.samples[(n + s).rem_euclid(l as i64) as usize]).collect();
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        // frequencies in [-L/4, 3L/4): centred on the band of an analytic signal,
        // so the ramp commutes with modulations smaller than L/4
        let mut bins: Vec<Complex64> = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let ks = if 4 * k < 3 * l { k as f64 } else { k as f64 - l as f64 };
                x * Complex64::from_polar(1.0, two_pi * ks * d / l as f64)
            })
            .collect();
        dft_cube(&mut bins, l, 1, FftDirection::Inverse);
        let scale = 1.0 / l as f64;
        bins.iter_mut().for_each(|v| *v *= scale);
        bins
    }
}
