//! Morphisms between series.
//!
//! A morphism `f : V -> W` on the grid `Z_L` sends every index `i` of `V` to an
//! index `f1(i)` of `W` and carries, for each `i`, an integer matrix
//! `phi_i` of shape `[f1(i)] x [i]` whose columns each sum to one, and a mask
//! `psi_i` on `Z_L^[i]`. It pulls back target VFRFs by
//!
//! ```text
//! (f# w_hat)(W) = psi_i(W) w_hat(phi_i W mod L)
//! ```
//!
//! and its component at a signal is
//!
//! ```text
//! sum_i L^(1-[i]) sum_{sum(W) = w} psi_i(W) v_hat_i(W) prod_q s_hat(W_q) w_hat_{f1(i)}(phi_i W)
//! ```
//!
//! Column sums of one make `sum(phi_i W) = sum(W)`, which keeps the pullback on
//! the same output frequency.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result, VolterraError};
use crate::eval::collapse_diagonal;
use crate::kernel::VolterraFrf;
use crate::random::{random_complex, rng};
use crate::series::{TermIndex, VolterraSeries};
use crate::signal::{Multiplier, Spectrum};
use crate::tensor::{cube_len, next_index};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return contract(format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        (0..n).for_each(|i| data[i * n + i] = 1);
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn column_sums(&self) -> Vec<i64> {
        (0..self.cols).map(|c| (0..self.rows).map(|r| self.get(r, c)).sum()).collect()
    }

    /// `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return contract(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols));
        }
        let mut data = vec![0i64; self.rows * other.cols];
        for r in 0..self.rows {
            for c in 0..other.cols {
                data[r * other.cols + c] = (0..self.cols).map(|k| self.get(r, k) * other.get(k, c)).sum();
            }
        }
        Ok(Self { rows: self.rows, cols: other.cols, data })
    }

    /// `self * x mod L`, entries in `0..L`.
    pub fn apply_mod(&self, x: &[usize], length: usize, out: &mut [usize]) {
        let l = length as i64;
        for (r, slot) in out.iter_mut().enumerate() {
            let v: i64 = (0..self.cols).map(|c| self.get(r, c) * x[c] as i64).sum();
            *slot = v.rem_euclid(l) as usize;
        }
    }
}

/// The data attached to one source index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphismComponent {
    pub target: TermIndex,
    pub matrix: IntMatrix,
    /// Row-major mask on `Z_L^[i]`.
    pub mask: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Morphism {
    length: usize,
    components: BTreeMap<TermIndex, MorphismComponent>,
}

/// Problems found by [`validate`]; empty means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Morphism {
    pub fn new(length: usize, components: BTreeMap<TermIndex, MorphismComponent>) -> Result<Self> {
        if length == 0 {
            return contract("grid length must be at least 1");
        }
        Ok(Self { length, components })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn components(&self) -> &BTreeMap<TermIndex, MorphismComponent> {
        &self.components
    }

    pub fn component(&self, i: &TermIndex) -> Option<&MorphismComponent> {
        self.components.get(i)
    }

    /// The index map `f1`.
    pub fn target_of(&self, i: &TermIndex) -> Option<&TermIndex> {
        self.components.get(i).map(|c| &c.target)
    }

    /// The unit for [`compose_morphisms`]: identity index map, identity matrices, unit masks.
    pub fn identity(series: &VolterraSeries, length: usize) -> Self {
        Self::relabel(series, length, |i| i.clone())
    }

    /// Injection of `series` into a disjoint sum under the labels produced by `tag`.
    pub fn relabel(series: &VolterraSeries, length: usize, tag: impl Fn(&TermIndex) -> TermIndex) -> Self {
        let components = series
            .terms()
            .iter()
            .map(|t| {
                let j = t.kernel.order();
                let comp = MorphismComponent {
                    target: tag(&t.index),
                    matrix: IntMatrix::identity(j),
                    mask: vec![ONE; cube_len(length, j)],
                };
                (t.index.clone(), comp)
            })
            .collect();
        Self { length, components }
    }

    /// The copairing `[f, g] : V + W -> X` of `f : V -> X` and `g : W -> X`, on the
    /// labels used by [`crate::algebra::disjoint_sum`].
    pub fn copair(f: &Self, g: &Self) -> Result<Self> {
        if f.length != g.length {
            return contract("copairing morphisms on different grids");
        }
        let mut components = BTreeMap::new();
        for (i, c) in &f.components {
            components.insert(crate::algebra::left_label(i), c.clone());
        }
        for (i, c) in &g.components {
            components.insert(crate::algebra::right_label(i), c.clone());
        }
        Ok(Self { length: f.length, components })
    }
}

/// Check that `m` is a well-formed morphism `V -> W`.
pub fn validate(m: &Morphism, source: &VolterraSeries, target: &VolterraSeries) -> ValidationReport {
    let mut v = Vec::new();
    let l = m.length;
    for (name, s) in [("source", source), ("target", target)] {
        if s.max_order() > 0 && s.memory() > l {
            v.push(format!("{name} memory {} exceeds grid length {l}", s.memory()));
        }
    }
    for t in source.terms() {
        if !m.components.contains_key(&t.index) {
            v.push(format!("index `{}` has no component", t.index));
        }
    }
    for (i, c) in &m.components {
        let Some(src_order) = source.order_of(i) else {
            v.push(format!("component for `{i}`, which is not an index of the source"));
            continue;
        };
        let Some(dst_order) = target.order_of(&c.target) else {
            v.push(format!("`{i}` maps to `{}`, which is not an index of the target", c.target));
            continue;
        };
        if c.matrix.rows() != dst_order || c.matrix.cols() != src_order {
            v.push(format!(
                "`{i}`: matrix is {}x{}, expected {dst_order}x{src_order}",
                c.matrix.rows(),
                c.matrix.cols()
            ));
        } else if let Some(col) = c.matrix.column_sums().iter().position(|&s| s != 1) {
            v.push(format!("`{i}`: column {col} of the matrix does not sum to 1"));
        }
        if c.mask.len() != cube_len(l, src_order) {
            v.push(format!("`{i}`: mask has {} entries, expected {}", c.mask.len(), cube_len(l, src_order)));
        }
    }
    ValidationReport { violations: v }
}

fn require_valid(m: &Morphism, source: &VolterraSeries, target: &VolterraSeries) -> Result<()> {
    let report = validate(m, source, target);
    if report.is_valid() {
        Ok(())
    } else {
        contract(report.violations.join("; "))
    }
}

/// `psi_i(W) w_hat(phi_i W mod L)` over `Z_L^[i]`.
pub fn weighted_pullback(m: &Morphism, i: &TermIndex, w_hat: &VolterraFrf) -> Result<Vec<Complex64>> {
    let c = m.component(i).ok_or_else(|| VolterraError::Contract(format!("no component for `{i}`")))?;
    if w_hat.length() != m.length || w_hat.order() != c.matrix.rows() {
        return contract(format!("target VFRF does not match the component of `{i}`"));
    }
    let j = c.matrix.cols();
    let mut idx = vec![0usize; j];
    let mut img = vec![0usize; c.matrix.rows()];
    let mut out = Vec::with_capacity(c.mask.len());
    for &psi in &c.mask {
        c.matrix.apply_mod(&idx, m.length, &mut img);
        out.push(psi * w_hat.at(&img));
        next_index(&mut idx, m.length);
    }
    Ok(out)
}

/// The graded weights `psi_i (.) (w_hat o phi_i)` of every source index.
fn pullbacks(
    m: &Morphism,
    source: &VolterraSeries,
    target: &VolterraSeries,
) -> Result<BTreeMap<TermIndex, Vec<Complex64>>> {
    let mut out = BTreeMap::new();
    for t in source.terms() {
        let c = &m.components[&t.index];
        let w = target.term(&c.target).expect("validated").kernel.vfrf(m.length)?;
        out.insert(t.index.clone(), weighted_pullback(m, &t.index, &w)?);
    }
    Ok(out)
}

/// Component of `m` at the input spectrum `s_hat`.
pub fn apply_component(
    m: &Morphism,
    source: &VolterraSeries,
    target: &VolterraSeries,
    s_hat: &Spectrum,
) -> Result<Spectrum> {
    require_valid(m, source, target)?;
    if s_hat.len() != m.length {
        return contract("spectrum length differs from the morphism grid");
    }
    let l = m.length;
    let pb = pullbacks(m, source, target)?;
    let mut y = vec![ZERO; l];
    for t in source.terms() {
        let j = t.kernel.order();
        let frf = t.kernel.vfrf(l)?;
        let weight: Vec<Complex64> = frf.data().iter().zip(&pb[&t.index]).map(|(v, p)| v * p).collect();
        let mut part = vec![ZERO; l];
        crate::eval::slice_sum(j, &weight, s_hat.bins(), &mut part);
        let scale = (l as f64).powi(1 - j as i32);
        y.iter_mut().zip(&part).for_each(|(o, p)| *o += p * scale);
    }
    Spectrum::new(y)
}

/// The series with the same labels as `source` whose VFRFs are
/// `psi_i v_hat_i (w_hat o phi_i)`. Evaluating it reproduces [`apply_component`].
pub fn image_series(m: &Morphism, source: &VolterraSeries, target: &VolterraSeries) -> Result<VolterraSeries> {
    require_valid(m, source, target)?;
    let l = m.length;
    let pb = pullbacks(m, source, target)?;
    let terms = source
        .terms()
        .iter()
        .map(|t| {
            let frf = t.kernel.vfrf(l)?;
            let data = frf.data().iter().zip(&pb[&t.index]).map(|(v, p)| v * p).collect();
            let img = VolterraFrf::from_data(t.kernel.order(), l, data)?;
            Ok((t.index.clone(), img.to_kernel(l)?))
        })
        .collect::<Result<Vec<_>>>()?;
    VolterraSeries::from_terms(terms)
}

/// Composite `g o f`: index map `g1 o f1`, matrices `phi_g phi_f`, masks
/// `psi_f (.) (psi_g o phi_f)`.
pub fn compose_morphisms(g: &Morphism, f: &Morphism) -> Result<Morphism> {
    if g.length != f.length {
        return contract("composing morphisms on different grids");
    }
    let l = f.length;
    let mut components = BTreeMap::new();
    for (i, cf) in &f.components {
        let cg = g.components.get(&cf.target).ok_or_else(|| {
            VolterraError::Contract(format!("`{}` is not a source index of the outer morphism", cf.target))
        })?;
        let matrix = cg.matrix.mul(&cf.matrix)?;
        let j = cf.matrix.cols();
        let mut idx = vec![0usize; j];
        let mut img = vec![0usize; cf.matrix.rows()];
        let mut mask = Vec::with_capacity(cf.mask.len());
        for &psi in &cf.mask {
            cf.matrix.apply_mod(&idx, l, &mut img);
            mask.push(psi * cg.mask[crate::tensor::flat_index(&img, l)]);
            next_index(&mut idx, l);
        }
        components.insert(i.clone(), MorphismComponent { target: cg.target.clone(), matrix, mask });
    }
    Ok(Morphism { length: l, components })
}

/// A linear map on the graded tensors `v_hat_i (.) s_hat^{(x)[i]}`.
pub trait ComponentMap {
    fn map(&self, index: &TermIndex, tensor: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// The component map of a validated morphism: multiplication by its pullback weights.
pub struct MorphismAction {
    weights: BTreeMap<TermIndex, Vec<Complex64>>,
}

impl MorphismAction {
    pub fn new(m: &Morphism, source: &VolterraSeries, target: &VolterraSeries) -> Result<Self> {
        require_valid(m, source, target)?;
        Ok(Self { weights: pullbacks(m, source, target)? })
    }
}

impl ComponentMap for MorphismAction {
    fn map(&self, index: &TermIndex, tensor: &[Complex64]) -> Result<Vec<Complex64>> {
        let w = self.weights.get(index).ok_or_else(|| VolterraError::Contract(format!("no weights for `{index}`")))?;
        Ok(tensor.iter().zip(w).map(|(a, b)| a * b).collect())
    }
}

/// A convolution along the first frequency axis, `X(W) -> X(W - offset e_1)`.
/// Not a morphism component; it fails the naturality square.
pub struct SpectralShift {
    pub length: usize,
    pub offset: usize,
}

impl ComponentMap for SpectralShift {
    fn map(&self, _index: &TermIndex, tensor: &[Complex64]) -> Result<Vec<Complex64>> {
        let l = self.length;
        if tensor.len() <= 1 {
            return Ok(tensor.to_vec());
        }
        let block = tensor.len() / l;
        let mut out = vec![ZERO; tensor.len()];
        for k in 0..l {
            let src = (k + l - self.offset % l) % l;
            out[k * block..(k + 1) * block].copy_from_slice(&tensor[src * block..(src + 1) * block]);
        }
        Ok(out)
    }
}

fn graded_tensor(frf: &VolterraFrf, factor: &[Complex64]) -> Vec<Complex64> {
    let l = frf.length();
    let mut idx = vec![0usize; frf.order()];
    let mut out = Vec::with_capacity(frf.data().len());
    for &v in frf.data() {
        out.push(idx.iter().fold(v, |acc, &k| acc * factor[k]));
        next_index(&mut idx, l);
    }
    out
}

/// Largest relative gap between the two paths of the naturality square over
/// `trials` random (multiplier, signal) pairs:
///
/// * filter the input by `gamma`, then apply the component map;
/// * apply the component map, then lift `gamma` onto the graded output.
pub fn naturality_residual(
    map: &dyn ComponentMap,
    source: &VolterraSeries,
    length: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut r = rng(seed);
    let frfs =
        source.terms().iter().map(|t| Ok((t.index.clone(), t.kernel.vfrf(length)?))).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let gamma: Vec<Complex64> = (0..length).map(|_| random_complex(&mut r)).collect();
        let s_hat: Vec<Complex64> = (0..length).map(|_| random_complex(&mut r) * r.random_range(0.5..2.0)).collect();
        let filtered: Vec<Complex64> = s_hat.iter().zip(&gamma).map(|(a, b)| a * b).collect();
        let mut a = vec![ZERO; length];
        let mut b = vec![ZERO; length];
        for (index, frf) in &frfs {
            let j = frf.order();
            let scale = (length as f64).powi(1 - j as i32);
            let first = map.map(index, &graded_tensor(frf, &filtered))?;
            let plain = map.map(index, &graded_tensor(frf, &s_hat))?;
            let ones = VolterraFrf::from_data(j, length, plain)?;
            let second = graded_tensor(&ones, &gamma);
            for (o, v) in a.iter_mut().zip(collapse_diagonal(j, length, &first)) {
                *o += v * scale;
            }
            for (o, v) in b.iter_mut().zip(collapse_diagonal(j, length, &second)) {
                *o += v * scale;
            }
        }
        let scale = crate::signal::max_abs(&a).max(crate::signal::max_abs(&b));
        if scale > 0.0 {
            worst = worst.max(crate::signal::max_abs_diff(&a, &b) / scale);
        }
    }
    Ok(worst)
}

/// Naturality residual of a morphism, see [`naturality_residual`].
pub fn check_naturality(
    m: &Morphism,
    source: &VolterraSeries,
    target: &VolterraSeries,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let action = MorphismAction::new(m, source, target)?;
    naturality_residual(&action, source, m.length, trials, seed)
}

/// Apply a multiplier to the input of a component: `apply_component` at `gamma s_hat`.
pub fn component_on_filtered(
    m: &Morphism,
    source: &VolterraSeries,
    target: &VolterraSeries,
    gamma: &Multiplier,
    s_hat: &Spectrum,
) -> Result<Spectrum> {
    apply_component(m, source, target, &s_hat.pointwise(gamma)?)
}
