//! Ready-made morphisms out of a series.
//!
//! Every catalog morphism keeps the index set of the source, uses identity
//! matrices, and differs only in its target series and masks.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{contract, Result, VolterraError};
use crate::kernel::VolterraKernel;
use crate::morphism::{image_series, IntMatrix, Morphism, MorphismComponent};
use crate::series::VolterraSeries;
use crate::tensor::{cube_len, signed_mod};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative threshold below which the identity mask is set to zero.
pub const IDENTITY_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum CatalogKind {
    /// Target `delta^{(x) j}` per index; the component is plain evaluation.
    Trivial,
    /// Target equal to the source, unit masks; the component squares every VFRF.
    Autoconvolution,
    /// Target equal to the source, masks `1 / v_hat` (zero where
    /// `|v_hat| < IDENTITY_EPS max |v_hat|`); the component is plain evaluation.
    Identity,
    /// Target `delta` at the offset of each order; `offsets[j]` has length `j`.
    Translation { offsets: Vec<Vec<usize>> },
    /// Target whose VFRF is the spectral comb `[W_r = 0 mod spacing_j for all r]`.
    /// In time this is a Dirac comb of period `L / spacing_j` scaled by
    /// `spacing_j^-j`; spacing 1 is all-pass.
    Sampling { spacings: Vec<usize> },
    /// Target `exp(-tau^T C_j tau)` on circular delays, normalized to unit sum.
    /// `precisions[j]` is a `j x j` positive definite matrix.
    Smoothing { precisions: Vec<Vec<Vec<f64>>> },
}

fn per_order<'a, T>(params: &'a [T], j: usize, what: &str) -> Result<&'a T> {
    params.get(j).ok_or_else(|| VolterraError::Contract(format!("no {what} given for order {j}")))
}

fn is_positive_definite(c: &[Vec<f64>]) -> bool {
    // Cholesky
    let n = c.len();
    if c.iter().any(|row| row.len() != n) {
        return false;
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = c[i][i] - s;
                if d <= 0.0 || (c[i][j] - c[j][i]).abs() > 1e-12 * c[i][j].abs().max(1.0) {
                    return false;
                }
                l[i][j] = d.sqrt();
            } else {
                if (c[i][j] - c[j][i]).abs() > 1e-12 * c[i][j].abs().max(1.0) {
                    return false;
                }
                l[i][j] = (c[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

fn target_kernel(kind: &CatalogKind, order: usize, length: usize) -> Result<VolterraKernel> {
    let j = order;
    match kind {
        CatalogKind::Trivial => VolterraKernel::delta(1, &vec![0; j], ONE),
        CatalogKind::Translation { offsets } => {
            let off = per_order(offsets, j, "offset")?;
            if off.len() != j {
                return contract(format!("order-{j} offset must have {j} entries"));
            }
            let memory = off.iter().max().map_or(1, |m| m + 1);
            if memory > length {
                return Err(VolterraError::Resolution { memory, length });
            }
            VolterraKernel::delta(memory, off, ONE)
        }
        CatalogKind::Sampling { spacings } => {
            let t = *per_order(spacings, j, "spacing")?;
            if t == 0 || !length.is_multiple_of(t) {
                return Err(VolterraError::Aliasing { period: t, length });
            }
            let step = length / t;
            let w = (t as f64).powi(-(j as i32));
            Ok(VolterraKernel::from_fn(j, length, |tau| {
                if tau.iter().all(|&x| x % step == 0) {
                    Complex64::new(w, 0.0)
                } else {
                    ZERO
                }
            }))
        }
        CatalogKind::Smoothing { precisions } => {
            let c = per_order(precisions, j, "precision matrix")?;
            if c.len() != j || !is_positive_definite(c) {
                return contract(format!("order-{j} smoothing needs a {j}x{j} positive definite matrix"));
            }
            let mut k = VolterraKernel::from_fn(j, length, |tau| {
                let x: Vec<f64> = tau.iter().map(|&t| signed_mod(t, length) as f64).collect();
                let q: f64 = (0..j).map(|a| (0..j).map(|b| x[a] * c[a][b] * x[b]).sum::<f64>()).sum();
                Complex64::new((-q).exp(), 0.0)
            });
            let total: Complex64 = k.data().iter().sum();
            k = k.scaled(total.inv());
            Ok(k)
        }
        CatalogKind::Autoconvolution | CatalogKind::Identity => unreachable!("target is the source"),
    }
}

/// Target series and morphism `source -> target` on `Z_length` for a catalog entry.
pub fn catalog(kind: &CatalogKind, source: &VolterraSeries, length: usize) -> Result<(VolterraSeries, Morphism)> {
    if source.max_order() > 0 && source.memory() > length {
        return Err(VolterraError::Resolution { memory: source.memory(), length });
    }
    let target = match kind {
        CatalogKind::Autoconvolution | CatalogKind::Identity => source.clone(),
        _ => {
            let terms = source
                .terms()
                .iter()
                .map(|t| Ok((t.index.clone(), target_kernel(kind, t.kernel.order(), length)?)))
                .collect::<Result<Vec<_>>>()?;
            VolterraSeries::from_terms(terms)?
        }
    };
    let mut components = BTreeMap::new();
    for t in source.terms() {
        let j = t.kernel.order();
        let mask = if *kind == CatalogKind::Identity {
            let frf = t.kernel.vfrf(length)?;
            let eps = IDENTITY_EPS * crate::signal::max_abs(frf.data());
            frf.data().iter().map(|v| if v.norm() < eps || v.norm() == 0.0 { ZERO } else { v.inv() }).collect()
        } else {
            vec![ONE; cube_len(length, j)]
        };
        components.insert(
            t.index.clone(),
            MorphismComponent { target: t.index.clone(), matrix: IntMatrix::identity(j), mask },
        );
    }
    Ok((target, Morphism::new(length, components)?))
}

/// Image series of `source` under a family of catalog morphisms, one per parameter.
pub fn generate_family<P>(
    source: &VolterraSeries,
    length: usize,
    params: &[P],
    make: impl Fn(&P) -> CatalogKind,
) -> Result<Vec<VolterraSeries>> {
    params
        .iter()
        .map(|p| {
            let (target, m) = catalog(&make(p), source, length)?;
            image_series(&m, source, &target)
        })
        .collect()
}
