//! Linear time-invariant maps acting on series.
//!
//! A multiplier `gamma` acts on the input spectrum, `s_hat -> gamma s_hat`. Lifted
//! to a series it multiplies every VFRF by `gamma^{(x) j}`. The special cases below
//! (translation, modulation, periodization, sampling) each have a closed form that
//! is checked against the generic input-transform path.

use num_complex::Complex64;

use crate::combinatorics::weighted_multisets;
use crate::error::{contract, Result, VolterraError};
use crate::eval::{eval_freq, eval_time, slice_sum};
use crate::kernel::VolterraFrf;
use crate::series::{Term, VolterraSeries};
use crate::signal::{max_abs_diff, Multiplier, SampledSignal, Spectrum};
use crate::tensor::{cube_len, next_index};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn lifted_weight(frf: &VolterraFrf, gamma: &Multiplier) -> Vec<Complex64> {
    let l = frf.length();
    let j = frf.order();
    let mut idx = vec![0usize; j];
    let mut out = Vec::with_capacity(cube_len(l, j));
    for &v in frf.data() {
        out.push(idx.iter().fold(v, |acc, &k| acc * gamma.at(k)));
        next_index(&mut idx, l);
    }
    out
}

/// Output spectrum of the series on the filtered input `gamma s_hat`, computed with
/// the lifted multiplier `v_hat (.) gamma^{(x) j}`.
pub fn apply_action(series: &VolterraSeries, gamma: &Multiplier, s_hat: &Spectrum) -> Result<Spectrum> {
    let l = s_hat.len();
    if gamma.len() != l {
        return contract("multiplier and spectrum lengths differ");
    }
    let mut y = vec![ZERO; l];
    for term in series.terms() {
        let j = term.kernel.order();
        let w = lifted_weight(&term.kernel.vfrf(l)?, gamma);
        let mut part = vec![ZERO; l];
        slice_sum(j, &w, s_hat.bins(), &mut part);
        let scale = (l as f64).powi(1 - j as i32);
        y.iter_mut().zip(&part).for_each(|(o, p)| *o += p * scale);
    }
    Spectrum::new(y)
}

/// The series whose kernels have VFRFs `v_hat (.) gamma^{(x) j}`; memory becomes `L`.
pub fn lift_series(series: &VolterraSeries, gamma: &Multiplier) -> Result<VolterraSeries> {
    let l = gamma.len();
    let terms = series
        .terms()
        .iter()
        .map(|Term { index, kernel }| {
            let frf = kernel.vfrf(l)?;
            let lifted = VolterraFrf::from_data(kernel.order(), l, lifted_weight(&frf, gamma))?;
            Ok((index.clone(), lifted.to_kernel(l)?))
        })
        .collect::<Result<Vec<_>>>()?;
    VolterraSeries::from_terms(terms)
}

/// Output on the delayed input `s(t - d)`. The result must equal the delayed
/// output; a mismatch above `1e-10` (relative) is reported as an internal
/// consistency failure.
pub fn act_translation(series: &VolterraSeries, s: &SampledSignal, d: isize) -> Result<SampledSignal> {
    let shifted_in = eval_time(series, &s.delayed(d))?;
    let shifted_out = eval_time(series, s)?.delayed(d);
    let residual = max_abs_diff(shifted_in.samples(), shifted_out.samples());
    if residual > 1e-10 * shifted_out.max_abs().max(1.0) {
        return Err(VolterraError::InternalConsistency { residual });
    }
    Ok(shifted_in)
}

/// Output spectrum on the modulated input `exp(2 pi i xi t / L) s(t)`, i.e. with
/// every input bin read at `W_q - xi`.
pub fn act_modulation(series: &VolterraSeries, s_hat: &Spectrum, xi: isize) -> Result<Spectrum> {
    let l = s_hat.len();
    let shifted: Vec<Complex64> = (0..l as isize).map(|w| s_hat.at(w - xi)).collect();
    eval_freq(series, &Spectrum::new(shifted)?)
}

/// Response to the complex exponential `exp(2 pi i xi t / L)`:
/// `y(t) = sum_j exp(2 pi i j xi t / L) v_hat_j(xi, .., xi)`.
pub fn response_exponential(series: &VolterraSeries, xi: isize, length: usize) -> Result<SampledSignal> {
    if series.max_order() > 0 && series.memory() > length {
        return Err(VolterraError::Resolution { memory: series.memory(), length });
    }
    let l = length as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut diag = Vec::new();
    for term in series.terms() {
        let k = &term.kernel;
        let mut tau = vec![0usize; k.order()];
        let mut acc = ZERO;
        for &v in k.data() {
            let lag: usize = tau.iter().sum();
            acc += v * Complex64::from_polar(1.0, -two_pi * (xi * lag as isize) as f64 / l);
            next_index(&mut tau, k.memory());
        }
        diag.push((k.order(), acc));
    }
    let y = (0..length)
        .map(|t| {
            diag.iter()
                .map(|&(j, v)| v * Complex64::from_polar(1.0, two_pi * (j as isize * xi * t as isize) as f64 / l))
                .sum()
        })
        .collect();
    SampledSignal::new(y)
}

fn check_divides(period: usize, length: usize) -> Result<()> {
    if period == 0 || !length.is_multiple_of(period) {
        return Err(VolterraError::Aliasing { period, length });
    }
    Ok(())
}

/// Periodization keeping every `spacing`-th bin: `s_hat(k) [k = 0 mod spacing]`.
///
/// In time this is `(1/T) sum_{r < T} s(t - r L / T)` with `T = spacing`;
/// `spacing = 1` is the identity.
pub fn periodize(s: &SampledSignal, spacing: usize) -> Result<SampledSignal> {
    let l = s.len();
    check_divides(spacing, l)?;
    let step = (l / spacing) as isize;
    let scale = 1.0 / spacing as f64;
    let y =
        (0..l as isize).map(|t| (0..spacing as isize).map(|r| s.at(t - r * step)).sum::<Complex64>() * scale).collect();
    SampledSignal::new(y)
}

/// Output spectrum on the periodized input, summing only over lattice bins
/// (multiples of `spacing`) collected by multiset with multinomial weights.
pub fn act_periodization(series: &VolterraSeries, s_hat: &Spectrum, spacing: usize) -> Result<Spectrum> {
    let l = s_hat.len();
    check_divides(spacing, l)?;
    let lattice: Vec<usize> = (0..l).step_by(spacing).collect();
    let mut y = vec![ZERO; l];
    for term in series.symmetrized().terms() {
        let j = term.kernel.order();
        let frf = term.kernel.vfrf(l)?;
        let scale = (l as f64).powi(1 - j as i32);
        for (bins, weight) in weighted_multisets(&lattice, j)? {
            let prod = bins.iter().fold(frf.at(&bins), |acc, &b| acc * s_hat.bins()[b]);
            let w = bins.iter().sum::<usize>() % l;
            y[w] += prod * (weight as f64 * scale);
        }
    }
    Spectrum::new(y)
}

/// The Dirac comb `[t = 0 mod period]` on `Z_L`.
pub fn comb(length: usize, period: usize) -> Result<SampledSignal> {
    check_divides(period, length)?;
    let v = (0..length).map(|t| if t % period == 0 { Complex64::new(1.0, 0.0) } else { ZERO }).collect();
    SampledSignal::new(v)
}

/// Output on the sampled input `s(t) [t = 0 mod period]`.
///
/// Only delays with `t - tau_r = 0 mod period` survive; the surviving delay tuples
/// are collected by multiset with multinomial weights.
pub fn act_sampling(series: &VolterraSeries, s: &SampledSignal, period: usize) -> Result<SampledSignal> {
    comb_closed_form(series, s.len(), period, |t| s.at(t))
}

/// Response to the comb `[t = 0 mod period]`: `y(t) = sum_j sum multinomial * v_j(t 1 - period k)`.
pub fn response_comb(series: &VolterraSeries, period: usize, length: usize) -> Result<SampledSignal> {
    comb_closed_form(series, length, period, |_| Complex64::new(1.0, 0.0))
}

fn comb_closed_form(
    series: &VolterraSeries,
    length: usize,
    period: usize,
    s: impl Fn(isize) -> Complex64,
) -> Result<SampledSignal> {
    check_divides(period, length)?;
    if series.max_order() > 0 && series.memory() > length {
        return Err(VolterraError::Resolution { memory: series.memory(), length });
    }
    let sym = series.symmetrized();
    let mut y = vec![ZERO; length];
    for (t, out) in y.iter_mut().enumerate() {
        let delays: Vec<usize> =
            (0..sym.memory()).filter(|&tau| (t + length - tau % length).is_multiple_of(period)).collect();
        for term in sym.terms() {
            let k = &term.kernel;
            for (taus, weight) in weighted_multisets(&delays, k.order())? {
                let prod = taus.iter().fold(k.get(&taus), |acc, &tau| acc * s(t as isize - tau as isize));
                *out += prod * weight as f64;
            }
        }
    }
    SampledSignal::new(y)
}

/// Bin-wise quotient `V(gamma s_hat) / V(s_hat)` with the bins where it is undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedKernel {
    pub weights: Multiplier,
    /// Bins of the requested support where `|V(s_hat)|` fell below the threshold.
    pub cancelled: Vec<usize>,
    pub threshold: f64,
}

/// Linear kernel induced on the output by the input multiplier `gamma`.
///
/// Bins outside `support` (all bins when `None`) and bins with
/// `|V(s_hat)| < 1e-9 max |V(s_hat)|` are set to zero; the latter are listed in
/// `cancelled`.
pub fn induced_linear_kernel(
    series: &VolterraSeries,
    gamma: &Multiplier,
    s_hat: &Spectrum,
    support: Option<&[usize]>,
) -> Result<InducedKernel> {
    let base = eval_freq(series, s_hat)?;
    let moved = apply_action(series, gamma, s_hat)?;
    let threshold = 1e-9 * base.max_abs();
    let l = s_hat.len();
    let all: Vec<usize> = (0..l).collect();
    let support = support.unwrap_or(&all);
    let mut weights = vec![ZERO; l];
    let mut cancelled = Vec::new();
    for &k in support {
        if k >= l {
            return Err(VolterraError::OutOfGrid { index: vec![k] });
        }
        let den = base.bins()[k];
        if den.norm() < threshold || den.norm() == 0.0 {
            cancelled.push(k);
        } else {
            weights[k] = moved.bins()[k] / den;
        }
    }
    Ok(InducedKernel { weights: Multiplier::new(weights)?, cancelled, threshold })
}
