//! Sampled signals on the circular grid `Z_L` and their spectra.

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::tensor::dft_cube;

/// A complex signal `s(t)`, `t = 0..L`, indexed circularly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
}

/// DFT of a [`SampledSignal`]: `s_hat(k) = sum_t s(t) exp(-2 pi i k t / L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    bins: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return contract("a signal needs at least one sample");
        }
        Ok(Self { samples })
    }

    pub fn from_real(samples: &[f64]) -> Result<Self> {
        Self::new(samples.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(length: usize, value: Complex64) -> Result<Self> {
        Self::new(vec![value; length])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Circular sample `s(t mod L)` for any integer `t`.
    pub fn at(&self, t: isize) -> Complex64 {
        self.samples[t.rem_euclid(self.len() as isize) as usize]
    }

    /// `t -> s(t - d)`.
    pub fn delayed(&self, d: isize) -> Self {
        let samples = (0..self.len() as isize).map(|t| self.at(t - d)).collect();
        Self { samples }
    }

    /// `t -> exp(2 pi i xi t / L) s(t)`, which moves the spectrum up by `xi` bins.
    pub fn modulated(&self, xi: isize) -> Self {
        let l = self.len() as f64;
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(t, &v)| {
                let ph = 2.0 * std::f64::consts::PI * (xi as f64) * (t as f64) / l;
                v * Complex64::from_polar(1.0, ph)
            })
            .collect();
        Self { samples }
    }

    pub fn pointwise(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return contract("pointwise product of signals with different lengths");
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect();
        Ok(Self { samples })
    }

    pub fn conj(&self) -> Self {
        Self { samples: self.samples.iter().map(|v| v.conj()).collect() }
    }

    pub fn dft(&self) -> Spectrum {
        let mut bins = self.samples.clone();
        dft_cube(&mut bins, self.len(), 1, FftDirection::Forward);
        Spectrum { bins }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.samples)
    }
}

impl Spectrum {
    pub fn new(bins: Vec<Complex64>) -> Result<Self> {
        if bins.is_empty() {
            return contract("a spectrum needs at least one bin");
        }
        Ok(Self { bins })
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    /// Bin `k mod L` for any integer `k`.
    pub fn at(&self, k: isize) -> Complex64 {
        self.bins[k.rem_euclid(self.len() as isize) as usize]
    }

    /// Inverse DFT, including the `1/L` factor.
    pub fn idft(&self) -> SampledSignal {
        let mut samples = self.bins.clone();
        let n = self.len();
        dft_cube(&mut samples, n, 1, FftDirection::Inverse);
        let scale = 1.0 / n as f64;
        samples.iter_mut().for_each(|v| *v *= scale);
        SampledSignal { samples }
    }

    pub fn pointwise(&self, other: &Multiplier) -> Result<Self> {
        if self.len() != other.len() {
            return contract("multiplier length differs from spectrum length");
        }
        let bins = self.bins.iter().zip(other.weights()).map(|(a, b)| a * b).collect();
        Ok(Self { bins })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.bins)
    }
}

/// A linear time-invariant map given by its frequency response `gamma(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    weights: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        if weights.is_empty() {
            return contract("a multiplier needs at least one bin");
        }
        Ok(Self { weights })
    }

    pub fn identity(length: usize) -> Self {
        Self { weights: vec![Complex64::new(1.0, 0.0); length.max(1)] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn at(&self, k: usize) -> Complex64 {
        self.weights[k % self.len()]
    }

    /// `(self * other)(k) = self(k) other(k)`, i.e. applying `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return contract("multipliers of different lengths");
        }
        let weights = self.weights.iter().zip(&other.weights).map(|(a, b)| a * b).collect();
        Ok(Self { weights })
    }
}

pub(crate) fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest pointwise distance between two equal-length slices.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dft_of_impulse_is_flat() {
        let mut v = vec![c(0.0, 0.0); 8];
        v[0] = c(1.0, 0.0);
        let s = SampledSignal::new(v).unwrap().dft();
        assert!(s.bins().iter().all(|b| (b - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn dft_idft_roundtrip() {
        let s = SampledSignal::new((0..7).map(|t| c(t as f64, -(t as f64) / 3.0)).collect()).unwrap();
        let back = s.dft().idft();
        assert!(max_abs_diff(s.samples(), back.samples()) < 1e-12);
    }

    #[test]
    fn modulation_shifts_bins() {
        let s = SampledSignal::new((0..8).map(|t| c((t as f64).cos(), 0.5 * t as f64)).collect()).unwrap();
        let base = s.dft();
        let shifted = s.modulated(3).dft();
        for k in 0..8 {
            assert!((shifted.at(k) - base.at(k - 3)).norm() < 1e-12);
        }
    }

    #[test]
    fn delay_is_circular() {
        let s = SampledSignal::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = s.delayed(1);
        assert_eq!(d.samples()[0], c(4.0, 0.0));
        assert_eq!(d.samples()[1], c(1.0, 0.0));
    }

    #[test]
    fn empty_signal_rejected() {
        assert!(SampledSignal::new(vec![]).is_err());
    }
}
