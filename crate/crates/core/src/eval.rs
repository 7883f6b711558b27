//! Evaluating series on signals, in time and in frequency.
//!
//! Time domain, circular grid `Z_L`:
//!
//! ```text
//! y(t) = v0 + sum_j sum_tau v_j(tau) prod_r s(t - tau_r)
//! ```
//!
//! Frequency domain, with the same DFT convention as [`SampledSignal::dft`]:
//!
//! ```text
//! y_hat(w) = v0 L [w = 0] + sum_j L^(1-j) sum_{sum(W) = w mod L} v_hat_j(W) prod_q s_hat(W_q)
//! ```

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::combinatorics::{multicombinations, Multicombination};
use crate::error::{contract, Result, VolterraError};
use crate::kernel::VolterraKernel;
use crate::series::VolterraSeries;
use crate::signal::{SampledSignal, Spectrum};
use crate::tensor::{cube_len, next_index};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_resolution(memory: usize, length: usize) -> Result<()> {
    if memory > length {
        return Err(VolterraError::Resolution { memory, length });
    }
    Ok(())
}

/// Direct nested-loop evaluation, one output sample at a time.
pub fn oracle_eval(series: &VolterraSeries, s: &SampledSignal) -> Result<SampledSignal> {
    let l = s.len();
    if series.max_order() > 0 {
        check_resolution(series.memory(), l)?;
    }
    let mut y = vec![ZERO; l];
    for (t, out) in y.iter_mut().enumerate() {
        for term in series.terms() {
            let k = &term.kernel;
            let mut tau = vec![0usize; k.order()];
            for &v in k.data() {
                let mut prod = v;
                for &d in &tau {
                    prod *= s.at(t as isize - d as isize);
                }
                *out += prod;
                next_index(&mut tau, k.memory());
            }
        }
    }
    SampledSignal::new(y)
}

/// Time-domain evaluation with shared partial products and pruning of all-zero
/// kernel blocks.
pub fn eval_time(series: &VolterraSeries, s: &SampledSignal) -> Result<SampledSignal> {
    if series.max_order() > 0 {
        check_resolution(series.memory(), s.len())?;
    }
    let mut y = vec![ZERO; s.len()];
    for term in series.terms() {
        let slots = vec![s; term.kernel.order()];
        accumulate_kernel(&term.kernel, &slots, &mut y);
    }
    SampledSignal::new(y)
}

/// Output of each order separately: `order -> sum of that order's terms`.
pub fn eval_by_order(series: &VolterraSeries, s: &SampledSignal) -> Result<BTreeMap<usize, SampledSignal>> {
    if series.max_order() > 0 {
        check_resolution(series.memory(), s.len())?;
    }
    let mut out = BTreeMap::new();
    for j in series.orders() {
        let mut y = vec![ZERO; s.len()];
        let slots = vec![s; j];
        for term in series.terms().iter().filter(|t| t.kernel.order() == j) {
            accumulate_kernel(&term.kernel, &slots, &mut y);
        }
        out.insert(j, SampledSignal::new(y)?);
    }
    Ok(out)
}

/// `y(t) += sum_tau v(tau) prod_r slots[r](t - tau_r)`.
pub(crate) fn accumulate_kernel(k: &VolterraKernel, slots: &[&SampledSignal], y: &mut [Complex64]) {
    let l = y.len();
    if k.order() == 0 {
        let v0 = k.data()[0];
        y.iter_mut().for_each(|o| *o += v0);
        return;
    }
    // nonzero_prefix[i] = number of nonzero entries among data[..i]
    let mut nonzero_prefix = Vec::with_capacity(k.data().len() + 1);
    nonzero_prefix.push(0usize);
    for v in k.data() {
        let last = *nonzero_prefix.last().unwrap();
        nonzero_prefix.push(last + usize::from(*v != ZERO));
    }
    let ones = vec![Complex64::new(1.0, 0.0); l];
    descend(k, slots, 0, 0, &ones, &nonzero_prefix, y);
}

fn descend(
    k: &VolterraKernel,
    slots: &[&SampledSignal],
    depth: usize,
    prefix: usize,
    partial: &[Complex64],
    nonzero_prefix: &[usize],
    y: &mut [Complex64],
) {
    let m = k.memory();
    let j = k.order();
    let block = cube_len(m, j - depth - 1);
    let mut next = vec![ZERO; partial.len()];
    for d in 0..m {
        let flat = (prefix * m + d) * block;
        if nonzero_prefix[flat + block] == nonzero_prefix[flat] {
            continue;
        }
        let sig = slots[depth];
        for (t, slot) in next.iter_mut().enumerate() {
            *slot = partial[t] * sig.at(t as isize - d as isize);
        }
        if depth + 1 == j {
            let v = k.data()[flat];
            y.iter_mut().zip(&next).for_each(|(o, p)| *o += v * p);
        } else {
            descend(k, slots, depth + 1, prefix * m + d, &next, nonzero_prefix, y);
        }
    }
}

/// `out[w] += sum over W in Z_L^j with sum(W) = w mod L of weight(W) * prod_q factor(W_q)`.
///
/// `weight` is a row-major `L^j` tensor.
pub(crate) fn slice_sum(j: usize, weight: &[Complex64], factor: &[Complex64], out: &mut [Complex64]) {
    let l = out.len();
    debug_assert_eq!(weight.len(), cube_len(l, j));
    if j == 0 {
        out[0] += weight[0];
        return;
    }
    slice_descend(j, 0, 0, 0, Complex64::new(1.0, 0.0), weight, factor, out);
}

#[allow(clippy::too_many_arguments)]
fn slice_descend(
    j: usize,
    depth: usize,
    prefix: usize,
    sum: usize,
    partial: Complex64,
    weight: &[Complex64],
    factor: &[Complex64],
    out: &mut [Complex64],
) {
    let l = out.len();
    for (w, &f) in factor.iter().enumerate() {
        let p = partial * f;
        if p == ZERO {
            continue;
        }
        let flat = prefix * l + w;
        let s = (sum + w) % l;
        if depth + 1 == j {
            out[s] += weight[flat] * p;
        } else {
            slice_descend(j, depth + 1, flat, s, p, weight, factor, out);
        }
    }
}

/// `out[w] = sum over W with sum(W) = w mod L of tensor(W)`.
pub fn collapse_diagonal(j: usize, length: usize, tensor: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; length];
    let mut idx = vec![0usize; j];
    for &v in tensor {
        out[idx.iter().sum::<usize>() % length] += v;
        next_index(&mut idx, length);
    }
    out
}

/// Frequency-domain evaluation via the projection-slice sums of each VFRF.
pub fn eval_freq(series: &VolterraSeries, s_hat: &Spectrum) -> Result<Spectrum> {
    eval_freq_with_factor(series, s_hat.bins())
}

pub(crate) fn eval_freq_with_factor(series: &VolterraSeries, factor: &[Complex64]) -> Result<Spectrum> {
    let l = factor.len();
    let mut y = vec![ZERO; l];
    for term in series.terms() {
        let j = term.kernel.order();
        let frf = term.kernel.vfrf(l)?;
        let mut part = vec![ZERO; l];
        slice_sum(j, frf.data(), factor, &mut part);
        let scale = (l as f64).powi(1 - j as i32);
        y.iter_mut().zip(&part).for_each(|(o, p)| *o += p * scale);
    }
    Spectrum::new(y)
}

/// `y(t) = sum_{u,v} h(u, v) a(t - u) b(t - v)` for an order-2 kernel `h`.
pub fn eval_bilinear(h: &VolterraKernel, a: &SampledSignal, b: &SampledSignal) -> Result<SampledSignal> {
    if h.order() != 2 {
        return contract("bilinear evaluation needs an order-2 kernel");
    }
    if a.len() != b.len() {
        return contract("bilinear inputs differ in length");
    }
    check_resolution(h.memory(), a.len())?;
    let mut y = vec![ZERO; a.len()];
    accumulate_kernel(h, &[a, b], &mut y);
    SampledSignal::new(y)
}

/// Kernels of a multi-input, multi-output series.
///
/// Each kernel is keyed by an output and the multiset of inputs it reads. The
/// kernel's slots follow the canonical assignment of that multiset: the first
/// `n_1` delays act on input 0, the next `n_2` on input 1, and so on.
#[derive(Clone, Debug, Default)]
pub struct MultivariateKernelBank {
    inputs: usize,
    outputs: usize,
    constants: BTreeMap<usize, Complex64>,
    kernels: BTreeMap<(usize, Multicombination), VolterraKernel>,
}

impl MultivariateKernelBank {
    pub fn new(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, ..Default::default() }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Set the constant of one output. Outputs without a constant default to 0.
    pub fn set_constant(&mut self, output: usize, v0: Complex64) -> Result<()> {
        if output >= self.outputs {
            return contract(format!("output {output} out of range"));
        }
        self.constants.insert(output, v0);
        Ok(())
    }

    pub fn insert(&mut self, output: usize, inputs: Multicombination, kernel: VolterraKernel) -> Result<()> {
        if output >= self.outputs {
            return contract(format!("output {output} out of range"));
        }
        if inputs.classes() != self.inputs {
            return contract(format!("multicombination over {} inputs, bank has {}", inputs.classes(), self.inputs));
        }
        if kernel.order() != inputs.size() {
            return contract(format!(
                "kernel order {} differs from multicombination size {}",
                kernel.order(),
                inputs.size()
            ));
        }
        self.kernels.insert((output, inputs), kernel);
        Ok(())
    }

    pub fn kernels(&self) -> impl Iterator<Item = (&(usize, Multicombination), &VolterraKernel)> {
        self.kernels.iter()
    }
}

/// Evaluate every output of a kernel bank on `inputs`.
pub fn eval_multivariate(bank: &MultivariateKernelBank, inputs: &[SampledSignal]) -> Result<Vec<SampledSignal>> {
    if inputs.len() != bank.inputs {
        return contract(format!("bank expects {} inputs, got {}", bank.inputs, inputs.len()));
    }
    let Some(l) = inputs.first().map(SampledSignal::len) else {
        return contract("no inputs");
    };
    if inputs.iter().any(|s| s.len() != l) {
        return contract("inputs differ in length");
    }
    let mut ys: Vec<Vec<Complex64>> =
        (0..bank.outputs).map(|a| vec![bank.constants.get(&a).copied().unwrap_or(ZERO); l]).collect();
    for ((a, mc), k) in &bank.kernels {
        if k.order() == 0 {
            let v = k.data()[0];
            ys[*a].iter_mut().for_each(|y| *y += v);
            continue;
        }
        check_resolution(k.memory(), l)?;
        let weight = mc.multinomial()? as f64;
        let slots: Vec<&SampledSignal> = mc.canonical_assignment().into_iter().map(|c| &inputs[c]).collect();
        let mut part = vec![ZERO; l];
        accumulate_kernel(k, &slots, &mut part);
        ys[*a].iter_mut().zip(&part).for_each(|(y, p)| *y += p * weight);
    }
    ys.into_iter().map(SampledSignal::new).collect()
}

/// Number of ordered input pathways of orders `1..=max_order` for `b` inputs,
/// counted through multicombinations and their multinomials.
pub fn pathway_count(b: usize, max_order: usize) -> Result<u64> {
    let mut total = 0u64;
    for j in 1..=max_order {
        for mc in multicombinations(b, j) {
            total =
                total.checked_add(mc.multinomial()?).ok_or_else(|| VolterraError::Overflow("pathway count".into()))?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_series, random_signal, rng};
    use crate::series::{elementary_series, Elementary};
    use crate::signal::max_abs_diff;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delay_series_shifts() {
        let s = SampledSignal::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = elementary_series(&Elementary::Delay(1), 2).unwrap();
        assert_eq!(eval_time(&d, &s).unwrap().samples(), s.delayed(1).samples());
        assert_eq!(oracle_eval(&d, &s).unwrap().samples(), s.delayed(1).samples());
    }

    #[test]
    fn constant_and_square() {
        let s = SampledSignal::from_real(&[1.0, -2.0, 0.5]).unwrap();
        let p = elementary_series(&Elementary::Polynomial(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]), 1).unwrap();
        let y = eval_time(&p, &s).unwrap();
        assert_eq!(y.samples(), &[c(2.0, 0.0), c(5.0, 0.0), c(1.25, 0.0)]);
    }

    #[test]
    fn empty_series_is_zero() {
        let s = SampledSignal::from_real(&[1.0, 2.0]).unwrap();
        let y = eval_time(&VolterraSeries::empty(), &s).unwrap();
        assert!(y.samples().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn memory_longer_than_signal_rejected() {
        let d = elementary_series(&Elementary::Delay(4), 5).unwrap();
        let s = SampledSignal::from_real(&[1.0; 4]).unwrap();
        assert!(matches!(eval_time(&d, &s), Err(VolterraError::Resolution { .. })));
        assert!(matches!(oracle_eval(&d, &s), Err(VolterraError::Resolution { .. })));
    }

    #[test]
    fn fast_paths_match_oracle() {
        let mut r = rng(11);
        for _ in 0..30 {
            let series = random_series(&mut r, 3, 4);
            let s = random_signal(&mut r, 12);
            let o = oracle_eval(&series, &s).unwrap();
            let t = eval_time(&series, &s).unwrap();
            assert!(max_abs_diff(o.samples(), t.samples()) <= 1e-10 * o.max_abs().max(1.0));
            let f = eval_freq(&series, &s.dft()).unwrap();
            let scale = f.max_abs().max(1e-300);
            assert!(max_abs_diff(f.bins(), o.dft().bins()) / scale <= 1e-8);
        }
    }

    #[test]
    fn by_order_sums_to_total() {
        let mut r = rng(5);
        let series = random_series(&mut r, 3, 3);
        let s = random_signal(&mut r, 9);
        let parts = eval_by_order(&series, &s).unwrap();
        let mut acc = vec![ZERO; 9];
        for p in parts.values() {
            acc.iter_mut().zip(p.samples()).for_each(|(a, b)| *a += b);
        }
        assert!(max_abs_diff(&acc, eval_time(&series, &s).unwrap().samples()) < 1e-12);
    }

    #[test]
    fn bilinear_matches_multivariate_route() {
        let mut r = rng(9);
        let h = random_series(&mut r, 2, 3).kernel_of_order(2);
        let a = random_signal(&mut r, 8);
        let b = random_signal(&mut r, 8);
        let direct = eval_bilinear(&h, &a, &b).unwrap();
        let mut bank = MultivariateKernelBank::new(2, 1);
        bank.insert(0, Multicombination::new(vec![1, 1]), h.scaled(c(0.5, 0.0))).unwrap();
        let via_bank = eval_multivariate(&bank, &[a, b]).unwrap();
        assert!(max_abs_diff(direct.samples(), via_bank[0].samples()) < 1e-12);
    }

    #[test]
    fn cross_class_delta_gives_twice_product() {
        let u1 = SampledSignal::from_real(&[1.0, 2.0, -1.0]).unwrap();
        let u2 = SampledSignal::from_real(&[3.0, 0.5, 4.0]).unwrap();
        let mut bank = MultivariateKernelBank::new(2, 1);
        let delta = VolterraKernel::delta(1, &[0, 0], c(1.0, 0.0)).unwrap();
        bank.insert(0, Multicombination::new(vec![1, 1]), delta).unwrap();
        let y = eval_multivariate(&bank, &[u1, u2]).unwrap();
        assert_eq!(y[0].samples(), &[c(6.0, 0.0), c(2.0, 0.0), c(-8.0, 0.0)]);
    }

    #[test]
    fn single_input_bank_reduces_to_eval_time() {
        let mut r = rng(21);
        let series = random_series(&mut r, 3, 3).symmetrized();
        let s = random_signal(&mut r, 7);
        let mut bank = MultivariateKernelBank::new(1, 1);
        bank.set_constant(0, series.constant()).unwrap();
        for j in series.orders().into_iter().filter(|&j| j > 0) {
            bank.insert(0, Multicombination::new(vec![j]), series.kernel_of_order(j)).unwrap();
        }
        let y = eval_multivariate(&bank, std::slice::from_ref(&s)).unwrap();
        let expect = eval_time(&series, &s).unwrap();
        assert!(max_abs_diff(y[0].samples(), expect.samples()) < 1e-12);
    }

    #[test]
    fn bank_rejects_mismatched_order() {
        let mut bank = MultivariateKernelBank::new(2, 1);
        let k = VolterraKernel::zeros(3, 2);
        assert!(bank.insert(0, Multicombination::new(vec![1, 1]), k).is_err());
    }

    #[test]
    fn pathway_counts() {
        assert_eq!(pathway_count(2, 2).unwrap(), 6);
        assert_eq!(pathway_count(3, 3).unwrap(), 3 + 9 + 27);
    }

    #[test]
    fn collapse_matches_slice_sum() {
        let l = 5;
        let w: Vec<Complex64> = (0..25).map(|i| c(i as f64, 1.0)).collect();
        let ones = vec![c(1.0, 0.0); l];
        let mut via_slice = vec![ZERO; l];
        slice_sum(2, &w, &ones, &mut via_slice);
        assert!(max_abs_diff(&via_slice, &collapse_diagonal(2, l, &w)) < 1e-12);
    }
}
