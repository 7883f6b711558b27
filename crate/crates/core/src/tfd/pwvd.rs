//! Polynomial Wigner-Ville distribution and its lag-scaling constants.

use num_complex::Complex64;
use rustfft::FftDirection;

use super::{FractionalDelay, TfdGrid, ZERO};
use crate::error::{contract, Result, VolterraError};
use crate::kernel::VolterraKernel;
use crate::signal::SampledSignal;
use crate::tensor::dft_axis;

const INTEGRAL_TOL: f64 = 1e-12;
const MAX_LAG_STEP: usize = 16;

/// Lag scalings `lambda_l` for `l = 1..k/2` and their partners `lambda_{-l}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSet {
    positive: Vec<f64>,
    negative: Vec<f64>,
}

impl LambdaSet {
    /// `lambda_{-l} = -lambda_l`.
    pub fn new(positive: Vec<f64>) -> Result<Self> {
        let negative = positive.iter().map(|l| -l).collect();
        Self::with_partners(positive, negative)
    }

    /// Partners given explicitly, so that sets breaking antisymmetry can be
    /// represented and checked.
    pub fn with_partners(positive: Vec<f64>, negative: Vec<f64>) -> Result<Self> {
        if positive.is_empty() || positive.len() != negative.len() {
            return contract("a lambda set needs k/2 >= 1 matched pairs");
        }
        if positive.iter().chain(&negative).any(|l| !l.is_finite()) {
            return contract("lambda values must be finite");
        }
        Ok(Self { positive, negative })
    }

    pub fn order(&self) -> usize {
        2 * self.positive.len()
    }

    pub fn positive(&self) -> &[f64] {
        &self.positive
    }

    pub fn negative(&self) -> &[f64] {
        &self.negative
    }

    fn max_abs(&self) -> f64 {
        self.positive.iter().chain(&self.negative).fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Smallest step `c` making every `lambda c` an integer, if one divides `length`.
    fn integral_step(&self, length: usize) -> Option<usize> {
        (1..=MAX_LAG_STEP).find(|&c| {
            length.is_multiple_of(c)
                && self
                    .positive
                    .iter()
                    .chain(&self.negative)
                    .all(|l| (l * c as f64 - (l * c as f64).round()).abs() <= INTEGRAL_TOL)
        })
    }
}

/// `k = 2`: `(1/2)`. `k = 4`: `(1/4, 1/4)`. `k = 6`: the closed-form family in
/// `lambda_3 > 1/2`, with `lambda_1` taking the larger root.
pub fn pwvd_lambdas(k: usize, lambda3: Option<f64>) -> Result<LambdaSet> {
    match k {
        2 => LambdaSet::new(vec![0.5]),
        4 => LambdaSet::new(vec![0.25, 0.25]),
        6 => {
            let l3 = match lambda3 {
                Some(v) => v,
                None => return contract("k = 6 needs lambda_3"),
            };
            if !l3.is_finite() || l3 <= 0.5 {
                return Err(VolterraError::Domain(format!("lambda_3 = {l3}: real solutions need lambda_3 > 1/2")));
            }
            let radicand = 24.0 * l3.powi(3) + 12.0 * l3 * l3 - 6.0 * l3 + 1.0;
            let r = 3f64.sqrt() * radicand.sqrt() / (12.0 * (2.0 * l3 - 1.0).sqrt());
            let mid = 0.25 - l3 / 2.0;
            LambdaSet::new(vec![mid + r, mid - r, l3])
        }
        _ => Err(VolterraError::Unsupported(format!("closed-form lambdas for k = {k}"))),
    }
}

/// Residuals of the lambda constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaReport {
    /// `max_l |lambda_l + lambda_{-l}|`.
    pub antisymmetry: f64,
    /// `|sum_{l>0} lambda_l - 1/2|`.
    pub half_sum: f64,
    /// `(m, |sum_{l=-k/2}^{k/2} lambda_l^m|)` for odd `3 <= m <= p`.
    pub odd_moments: Vec<(u32, f64)>,
    /// `(m, |sum_{l>0} lambda_l^m|)` for the same `m`. These must also vanish for
    /// the distribution to concentrate on polynomial phases of degree `p`.
    pub one_sided_moments: Vec<(u32, f64)>,
}

impl LambdaReport {
    /// Antisymmetry, half-sum and two-sided odd moments within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.antisymmetry <= tol && self.half_sum <= tol && self.odd_moments.iter().all(|(_, r)| *r <= tol)
    }

    /// `passes` plus vanishing one-sided odd moments.
    pub fn concentrates(&self, tol: f64) -> bool {
        self.passes(tol) && self.one_sided_moments.iter().all(|(_, r)| *r <= tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.odd_moments.iter().map(|(_, r)| *r).fold(self.antisymmetry.max(self.half_sum), f64::max)
    }
}

pub fn check_lambda_constraints(ls: &LambdaSet, p: u32) -> LambdaReport {
    let antisymmetry = ls.positive.iter().zip(&ls.negative).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
    let half_sum = (ls.positive.iter().sum::<f64>() - 0.5).abs();
    let odd: Vec<u32> = (3..=p).filter(|m| m % 2 == 1).collect();
    let power_sum = |v: &[f64], m: u32| v.iter().map(|l| l.powi(m as i32)).sum::<f64>();
    LambdaReport {
        antisymmetry,
        half_sum,
        odd_moments: odd
            .iter()
            .map(|&m| (m, (power_sum(&ls.positive, m) + power_sum(&ls.negative, m)).abs()))
            .collect(),
        one_sided_moments: odd.iter().map(|&m| (m, power_sum(&ls.positive, m).abs())).collect(),
    }
}

/// Number of cross terms an order-`k` distribution produces between components.
pub fn interference_terms(k: u32) -> Result<u64> {
    (1..k).try_fold(0u64, |acc, r| {
        acc.checked_add(crate::combinatorics::binomial(k as u64, r as u64)?)
            .ok_or_else(|| VolterraError::Overflow(format!("interference count for k = {k}")))
    })
}

/// Lag geometry shared by `pwvd` and its kernel descriptor.
struct LagPlan {
    step: usize,
    bins: usize,
    max_lag: isize,
}

impl LagPlan {
    fn new(ls: &LambdaSet, length: usize) -> Result<Self> {
        if length < 4 {
            return contract("signal too short for a lag window");
        }
        let step = ls.integral_step(length).unwrap_or(1);
        // every shift stays within L/4
        let max_lag = (length as f64 / (4.0 * step as f64 * ls.max_abs())).floor() as isize;
        Ok(Self { step, bins: length / step, max_lag })
    }

    fn shift(&self, lambda: f64, m: isize) -> f64 {
        lambda * (self.step as isize * m) as f64
    }
}

/// `sum_tau exp(-2 pi i f tau / L) prod_l z(t + lambda_l tau) z*(t + lambda_{-l} tau)`
/// over `tau = c m`, where `c` is the smallest step making every shift integral
/// (else 1, with fractional delays). Bin `f` stands for `f / L` cycles per sample.
pub fn pwvd(z: &SampledSignal, ls: &LambdaSet) -> Result<TfdGrid> {
    let l = z.len();
    let plan = LagPlan::new(ls, l)?;
    let f = plan.bins;
    let mut fd = FractionalDelay::new(z);
    let mut values = vec![ZERO; l * f];
    let mut prod = vec![ZERO; l];
    for m in -plan.max_lag..=plan.max_lag {
        prod.iter_mut().for_each(|p| *p = Complex64::new(1.0, 0.0));
        for (&a, &b) in ls.positive.iter().zip(&ls.negative) {
            let (da, db) = (plan.shift(a, m), plan.shift(b, m));
            fd.prepare(da);
            fd.prepare(db);
            let (za, zb) = (fd.get(da), fd.get(db));
            for n in 0..l {
                prod[n] *= za[n] * zb[n].conj();
            }
        }
        let col = m.rem_euclid(f as isize) as usize;
        for n in 0..l {
            values[n * f + col] += prod[n];
        }
    }
    dft_axis(&mut values, &[l, f], 1, FftDirection::Forward);
    TfdGrid::new(l, f, 1.0 / l as f64, values)
}

/// One support point of the kernel: the shifts `tau_l` then `tau_{-l}` and the
/// Fourier weight there.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelPoint {
    pub lag: isize,
    pub shifts: Vec<f64>,
    pub weight: Complex64,
}

/// Sparse order-`k` kernel of one frequency bin of `pwvd`.
///
/// Support lies on the line `tau_l = lambda_l c m`, which is where the
/// anti-pairing, half-sum and odd-moment slices meet. It is empty when the
/// lambda set misses any of those slices.
#[derive(Clone, Debug, PartialEq)]
pub struct PwvdKernel {
    order: usize,
    bin: usize,
    length: usize,
    lag_step: usize,
    constraints: LambdaReport,
    points: Vec<KernelPoint>,
}

/// Tolerance for a lambda set to lie on the constraint slices.
pub const SLICE_TOL: f64 = 1e-9;

pub fn pwvd_volterra_kernel(ls: &LambdaSet, bin: usize, length: usize, p: u32) -> Result<PwvdKernel> {
    let plan = LagPlan::new(ls, length)?;
    if bin >= plan.bins {
        return Err(VolterraError::OutOfGrid { index: vec![bin] });
    }
    let constraints = check_lambda_constraints(ls, p);
    let mut points = Vec::new();
    if constraints.passes(SLICE_TOL) {
        for m in -plan.max_lag..=plan.max_lag {
            let shifts: Vec<f64> = ls.positive.iter().chain(&ls.negative).map(|&a| plan.shift(a, m)).collect();
            let half = ls.positive.len();
            let span: f64 = shifts[..half].iter().sum::<f64>() - shifts[half..].iter().sum::<f64>();
            let weight = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * bin as f64 * span / length as f64);
            points.push(KernelPoint { lag: m, shifts, weight });
        }
    }
    Ok(PwvdKernel { order: ls.order(), bin, length, lag_step: plan.step, constraints, points })
}

impl PwvdKernel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bin(&self) -> usize {
        self.bin
    }

    pub fn lag_step(&self) -> usize {
        self.lag_step
    }

    pub fn constraints(&self) -> &LambdaReport {
        &self.constraints
    }

    pub fn points(&self) -> &[KernelPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sum_points w prod_l z(t + tau_l) z*(t + tau_{-l})` for every `t`.
    pub fn contract(&self, z: &SampledSignal) -> Result<Vec<Complex64>> {
        if z.len() != self.length {
            return contract("signal length differs from the kernel's grid");
        }
        let half = self.order / 2;
        let mut fd = FractionalDelay::new(z);
        let mut out = vec![ZERO; self.length];
        for pt in &self.points {
            pt.shifts.iter().for_each(|&d| fd.prepare(d));
            for (t, o) in out.iter_mut().enumerate() {
                let mut p = pt.weight;
                for l in 0..half {
                    p *= fd.get(pt.shifts[l])[t] * fd.get(pt.shifts[half + l])[t].conj();
                }
                *o += p;
            }
        }
        Ok(out)
    }

    /// Dense order-2 kernel `h` with `row(t) = sum h(u, v) z*(t-u) z(t-v)`.
    pub fn to_bilinear(&self) -> Result<VolterraKernel> {
        if self.order != 2 {
            return contract("only order-2 kernels have a bilinear form");
        }
        let l = self.length as i64;
        let mut h = VolterraKernel::zeros(2, self.length);
        for pt in &self.points {
            if pt.shifts.iter().any(|d| d.fract() != 0.0) {
                return contract("fractional shifts have no dense kernel");
            }
            let u = (-pt.shifts[1] as i64).rem_euclid(l) as usize;
            let v = (-pt.shifts[0] as i64).rem_euclid(l) as usize;
            let cur = h.get(&[u, v]);
            h.set(&[u, v], cur + pt.weight);
        }
        Ok(h)
    }
}
