//! Sum, product and composition of series.
//!
//! Composition `B <| A` (apply `A`, then `B`) has order-`j` VFRF
//!
//! ```text
//! v_hat_j(W) = sum_{k <= n_B} sum_{p in comp(j, k)} b_hat_k(S_p W) prod_r a_hat_{p_r}(W_r)
//! ```
//!
//! where `W_r` is the `r`-th block of `W` under the composition `p` and `S_p W`
//! collects the block sums. `A` must have no constant term.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::combinatorics::compositions;
use crate::error::{contract, Result};
use crate::eval::eval_time;
use crate::kernel::{VolterraFrf, VolterraKernel};
use crate::random::{random_signal, rng};
use crate::series::{TermIndex, VolterraSeries};
use crate::signal::max_abs_diff;
use crate::tensor::{cube_len, dft_cube, next_index};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Orders dropped because they exceeded the order cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub operation: String,
    pub cap: usize,
    pub dropped_orders: Vec<usize>,
}

/// A series produced under an order cap, with a record of what the cap removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Capped {
    pub series: VolterraSeries,
    pub truncation: Option<Truncation>,
}

fn truncation(operation: &str, cap: usize, top: usize) -> Option<Truncation> {
    (top > cap).then(|| Truncation { operation: operation.to_string(), cap, dropped_orders: (cap + 1..=top).collect() })
}

/// Level-wise sum in canonical form; the smaller memory is zero-padded.
pub fn sum_series(a: &VolterraSeries, b: &VolterraSeries) -> Result<VolterraSeries> {
    let mut kernels: Vec<VolterraKernel> = a.to_canonical().terms().iter().map(|t| t.kernel.clone()).collect();
    kernels.extend(b.to_canonical().terms().iter().map(|t| t.kernel.clone()));
    VolterraSeries::from_kernels(kernels)
}

pub fn left_label(i: &TermIndex) -> TermIndex {
    TermIndex(format!("L:{i}"))
}

pub fn right_label(i: &TermIndex) -> TermIndex {
    TermIndex(format!("R:{i}"))
}

/// Sum that keeps every kernel of both summands under tagged labels. Evaluates to
/// the same output as [`sum_series`].
pub fn disjoint_sum(a: &VolterraSeries, b: &VolterraSeries) -> Result<VolterraSeries> {
    let terms = a
        .terms()
        .iter()
        .map(|t| (left_label(&t.index), t.kernel.clone()))
        .chain(b.terms().iter().map(|t| (right_label(&t.index), t.kernel.clone())))
        .collect();
    VolterraSeries::from_terms(terms)
}

/// Pointwise product of outputs: order `j` collects `a_k (x) b_{j-k}`.
pub fn product_series(a: &VolterraSeries, b: &VolterraSeries, cap: usize) -> Result<Capped> {
    let a = a.to_canonical();
    let b = b.to_canonical();
    if a.terms().is_empty() || b.terms().is_empty() {
        return Ok(Capped { series: VolterraSeries::empty(), truncation: None });
    }
    let top = a.max_order() + b.max_order();
    let mut kernels = Vec::new();
    for j in 0..=top.min(cap) {
        let mut acc: Option<VolterraKernel> = None;
        for ta in a.terms() {
            let k = ta.kernel.order();
            if k > j {
                continue;
            }
            let Some(tb) = b.terms().iter().find(|t| t.kernel.order() == j - k) else {
                continue;
            };
            let piece = ta.kernel.tensor(&tb.kernel)?;
            acc = Some(match acc {
                Some(prev) => prev.add(&piece)?,
                None => piece,
            });
        }
        kernels.extend(acc);
    }
    Ok(Capped { series: VolterraSeries::from_kernels(kernels)?, truncation: truncation("product", cap, top) })
}

fn is_identity(s: &VolterraSeries) -> bool {
    let one = Complex64::new(1.0, 0.0);
    s.orders() == [1] && {
        let k = s.kernel_of_order(1);
        k.data()[0] == one && k.data()[1..].iter().all(|v| *v == ZERO)
    }
}

/// `B <| A`: the series of `s -> B(A(s))`, orders above `cap` dropped.
///
/// Kernels are assembled on a grid just long enough to hold the composite memory
/// `M_A + M_B - 1` without wrap-around, transformed back and symmetrized.
pub fn compose_series(b: &VolterraSeries, a: &VolterraSeries, cap: usize) -> Result<Capped> {
    let a = a.to_canonical();
    let b = b.to_canonical();
    if a.constant() != ZERO {
        return contract("the inner series of a composition must have no constant term");
    }
    let n_a = a.max_order();
    let n_b = b.max_order();
    let top = n_a * n_b;
    let trunc = truncation("compose", cap, top);

    if is_identity(&a) {
        let (s, _) = b.symmetrized().truncated(cap);
        return Ok(Capped { series: s, truncation: trunc });
    }
    if is_identity(&b) {
        let (s, _) = a.symmetrized().truncated(cap);
        return Ok(Capped { series: s, truncation: trunc });
    }

    let memory = a.memory() + b.memory() - 1;
    let l = memory;
    let a_hat: Vec<Option<VolterraFrf>> = (0..=n_a)
        .map(|k| a.term(&TermIndex::for_order(k)).map(|t| t.kernel.vfrf(l)).transpose())
        .collect::<Result<_>>()?;
    let b_hat: Vec<Option<VolterraFrf>> = (0..=n_b)
        .map(|k| b.term(&TermIndex::for_order(k)).map(|t| t.kernel.vfrf(l)).transpose())
        .collect::<Result<_>>()?;

    let mut kernels = Vec::new();
    if b.constant() != ZERO {
        kernels.push(VolterraKernel::constant(b.constant()));
    }
    for j in 1..=top.min(cap) {
        let mut terms: Vec<(&VolterraFrf, Vec<(usize, &VolterraFrf)>)> = Vec::new();
        for (k, bk) in b_hat.iter().enumerate().skip(1) {
            let Some(bk) = bk else { continue };
            for p in compositions(j, k) {
                let blocks: Option<Vec<(usize, &VolterraFrf)>> =
                    p.iter().map(|&alpha| a_hat.get(alpha).and_then(|x| x.as_ref()).map(|f| (alpha, f))).collect();
                if let Some(blocks) = blocks {
                    terms.push((bk, blocks));
                }
            }
        }
        if terms.is_empty() {
            continue;
        }
        let mut data = vec![ZERO; cube_len(l, j)];
        let mut w = vec![0usize; j];
        let mut sums = Vec::with_capacity(j);
        for slot in data.iter_mut() {
            for (bk, blocks) in &terms {
                sums.clear();
                let mut prod = Complex64::new(1.0, 0.0);
                let mut start = 0;
                for &(alpha, ah) in blocks {
                    let block = &w[start..start + alpha];
                    sums.push(block.iter().sum::<usize>() % l);
                    prod *= ah.at(block);
                    start += alpha;
                }
                *slot += bk.at(&sums) * prod;
            }
            next_index(&mut w, l);
        }
        dft_cube(&mut data, l, j, FftDirection::Inverse);
        let scale = 1.0 / cube_len(l, j) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        kernels.push(VolterraKernel::new(j, memory, data)?.symmetrize_plain());
    }
    Ok(Capped { series: VolterraSeries::from_kernels(kernels)?, truncation: trunc })
}

/// Which kernels of `C`, `B` and `A` meet in one term of a triple composition:
/// the order of `C`, the orders of the `B` kernels feeding it, and the orders of
/// the `A` kernels feeding those, left to right.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContributionLabel {
    pub c_order: usize,
    pub b_orders: Vec<usize>,
    pub a_orders: Vec<usize>,
}

fn bounded(p: &[usize], max: usize) -> bool {
    p.iter().all(|&x| x <= max)
}

/// Terms of order `j` in `(C <| B) <| A`, enumerated as the outer composition sees them.
pub fn labels_left_nested(n_c: usize, n_b: usize, n_a: usize, j: usize) -> Vec<ContributionLabel> {
    let mut out = Vec::new();
    // outer: (C <| B)_l applied to A-blocks q
    for l in 1..=j {
        for q in compositions(j, l).into_iter().filter(|q| bounded(q, n_a)) {
            // inner: (C <| B)_l = sum_k C_k(B_{p_1}, .., B_{p_k})
            for k in 1..=n_c.min(l) {
                for p in compositions(l, k).into_iter().filter(|p| bounded(p, n_b)) {
                    out.push(ContributionLabel { c_order: k, b_orders: p, a_orders: q.clone() });
                }
            }
        }
    }
    out
}

/// Terms of order `j` in `C <| (B <| A)`, enumerated as the outer composition sees them.
pub fn labels_right_nested(n_c: usize, n_b: usize, n_a: usize, j: usize) -> Vec<ContributionLabel> {
    let mut out = Vec::new();
    for k in 1..=n_c.min(j) {
        for r in compositions(j, k) {
            // each r_i is an order of (B <| A), i.e. some B_l applied to l A-blocks
            let mut partial: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
            for &ri in &r {
                let mut next = Vec::new();
                for (bs, as_) in &partial {
                    for l in 1..=n_b.min(ri) {
                        for q in compositions(ri, l).into_iter().filter(|q| bounded(q, n_a)) {
                            let mut bs2 = bs.clone();
                            bs2.push(l);
                            let mut as2 = as_.clone();
                            as2.extend(q);
                            next.push((bs2, as2));
                        }
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().map(|(b_orders, a_orders)| ContributionLabel {
                c_order: k,
                b_orders,
                a_orders,
            }));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct AssociativityReport {
    /// `(order, max |left - right|)` for every compared order.
    pub kernel_deviation: Vec<(usize, f64)>,
    /// Largest output gap over the random trials.
    pub output_deviation: f64,
    pub labels_match: bool,
    pub left_labels: usize,
    pub right_labels: usize,
    pub truncations: Vec<Truncation>,
}

impl AssociativityReport {
    pub fn max_kernel_deviation(&self) -> f64 {
        self.kernel_deviation.iter().fold(0.0, |m, &(_, d)| m.max(d))
    }
}

/// `(order, max |difference|)` between the canonical kernels of two series,
/// after padding both to the larger memory.
pub fn kernel_deviation(a: &VolterraSeries, b: &VolterraSeries) -> Result<Vec<(usize, f64)>> {
    let (a, b) = (a.to_canonical(), b.to_canonical());
    let m = a.memory().max(b.memory());
    (0..=a.max_order().max(b.max_order()))
        .map(|j| {
            let ka = a.kernel_of_order(j).with_memory(m)?;
            let kb = b.kernel_of_order(j).with_memory(m)?;
            Ok((j, max_abs_diff(ka.data(), kb.data())))
        })
        .collect()
}

/// Compare `(C <| B) <| A` with `C <| (B <| A)` kernel by kernel, on `trials`
/// random signals of length `length`, and through their contribution labels.
pub fn associativity_harness(
    c: &VolterraSeries,
    b: &VolterraSeries,
    a: &VolterraSeries,
    cap: usize,
    trials: usize,
    length: usize,
    seed: u64,
) -> Result<AssociativityReport> {
    let cb = compose_series(c, b, cap)?;
    let left = compose_series(&cb.series, a, cap)?;
    let ba = compose_series(b, a, cap)?;
    let right = compose_series(c, &ba.series, cap)?;

    let top = left.series.max_order().max(right.series.max_order());
    let kernel_deviation = kernel_deviation(&left.series, &right.series)?;

    let mut r = rng(seed);
    let mut output_deviation = 0.0f64;
    for _ in 0..trials {
        let s = random_signal(&mut r, length);
        let yl = eval_time(&left.series, &s)?;
        let yr = eval_time(&right.series, &s)?;
        output_deviation = output_deviation.max(max_abs_diff(yl.samples(), yr.samples()));
    }

    let (n_c, n_b, n_a) = (c.max_order(), b.max_order(), a.max_order());
    let mut left_labels = Vec::new();
    let mut right_labels = Vec::new();
    for j in 1..=top {
        left_labels.extend(labels_left_nested(n_c, n_b, n_a, j));
        right_labels.extend(labels_right_nested(n_c, n_b, n_a, j));
    }
    let (nl, nr) = (left_labels.len(), right_labels.len());
    left_labels.sort();
    right_labels.sort();

    let truncations = [cb.truncation, left.truncation, ba.truncation, right.truncation].into_iter().flatten().collect();
    Ok(AssociativityReport {
        kernel_deviation,
        output_deviation,
        labels_match: left_labels == right_labels,
        left_labels: nl,
        right_labels: nr,
        truncations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_by_order;
    use crate::random::{random_kernel, random_series, random_series_without_constant};
    use crate::series::{elementary_series, Elementary};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    // Time-domain composite kernel: v(tau) = sum_sigma b(sigma) prod_r a_{p_r}(tau_r - sigma_r 1).
    fn composite_kernel_direct(b: &VolterraSeries, a: &VolterraSeries, j: usize) -> VolterraKernel {
        let m = a.memory() + b.memory() - 1;
        let mut out = VolterraKernel::zeros(j, m);
        for k in 1..=b.max_order().min(j) {
            let bk = b.kernel_of_order(k);
            for p in compositions(j, k) {
                if p.iter().any(|&x| x > a.max_order()) {
                    continue;
                }
                let mut tau = vec![0usize; j];
                loop {
                    let mut sigma = vec![0usize; k];
                    let mut acc = ZERO;
                    loop {
                        let mut prod = bk.get(&sigma);
                        let mut start = 0;
                        for (r, &alpha) in p.iter().enumerate() {
                            let ak = a.kernel_of_order(alpha);
                            let mut local = Vec::with_capacity(alpha);
                            for &t in &tau[start..start + alpha] {
                                if t < sigma[r] || t - sigma[r] >= a.memory() {
                                    prod = ZERO;
                                    break;
                                }
                                local.push(t - sigma[r]);
                            }
                            if prod == ZERO {
                                break;
                            }
                            prod *= ak.get(&local);
                            start += alpha;
                        }
                        acc += prod;
                        if !next_index(&mut sigma, b.memory()) {
                            break;
                        }
                    }
                    let prev = out.get(&tau);
                    out.set(&tau, prev + acc);
                    if !next_index(&mut tau, m) {
                        break;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn frequency_assembly_matches_time_domain_oracle() {
        let mut r = rng(31);
        for _ in 0..6 {
            let a = random_series_without_constant(&mut r, 2, 3);
            let b = random_series_without_constant(&mut r, 2, 2);
            let comp = compose_series(&b, &a, 4).unwrap().series;
            for j in 1..=4 {
                let direct = composite_kernel_direct(&b, &a, j).symmetrize_plain();
                let got = comp.kernel_of_order(j);
                assert!(max_abs_diff(direct.data(), got.data()) < 1e-12, "order {j}");
            }
        }
    }

    #[test]
    fn composition_is_operational() {
        let mut r = rng(32);
        for _ in 0..10 {
            let a = random_series_without_constant(&mut r, 2, 3);
            let mut b = random_series(&mut r, 2, 3);
            if b.max_order() == 0 {
                b = random_series_without_constant(&mut r, 2, 3);
            }
            let comp = compose_series(&b, &a, 4).unwrap();
            assert!(comp.truncation.is_none());
            let s = random_signal(&mut r, 12);
            let direct = eval_time(&b, &eval_time(&a, &s).unwrap()).unwrap();
            let via = eval_time(&comp.series, &s).unwrap();
            assert!(max_abs_diff(direct.samples(), via.samples()) <= 1e-8 * direct.max_abs().max(1.0));
        }
    }

    #[test]
    fn linear_composition_convolves() {
        let a = VolterraSeries::from_kernels(vec![VolterraKernel::new(1, 2, vec![c(1.0), c(2.0)]).unwrap()]).unwrap();
        let b = VolterraSeries::from_kernels(vec![VolterraKernel::new(1, 2, vec![c(3.0), c(-1.0)]).unwrap()]).unwrap();
        let k = compose_series(&b, &a, 4).unwrap().series.kernel_of_order(1);
        let expect = [c(3.0), c(5.0), c(-2.0)];
        assert!(max_abs_diff(k.data(), &expect) < 1e-14);
    }

    #[test]
    fn constant_inner_series_rejected() {
        let a = elementary_series(&Elementary::Polynomial(vec![c(1.0), c(1.0)]), 1).unwrap();
        let b = elementary_series(&Elementary::Identity, 1).unwrap();
        assert!(compose_series(&b, &a, 4).is_err());
    }

    #[test]
    fn truncation_is_recorded() {
        let sq = elementary_series(&Elementary::Polynomial(vec![c(0.0), c(0.0), c(1.0)]), 1).unwrap();
        let cube = elementary_series(&Elementary::Polynomial(vec![c(0.0), c(0.0), c(0.0), c(1.0)]), 1).unwrap();
        let out = compose_series(&cube, &sq, 4).unwrap();
        let t = out.truncation.unwrap();
        assert_eq!(t.dropped_orders, vec![5, 6]);
        assert!(out.series.terms().is_empty());
        let p = product_series(&cube, &sq, 4).unwrap();
        assert_eq!(p.truncation.unwrap().dropped_orders, vec![5]);
    }

    #[test]
    fn identity_units() {
        let mut r = rng(33);
        let id = elementary_series(&Elementary::Identity, 1).unwrap();
        let v = random_series_without_constant(&mut r, 3, 3);
        let expect = v.symmetrized();
        assert_eq!(compose_series(&v, &id, 4).unwrap().series, expect);
        assert_eq!(compose_series(&id, &v, 4).unwrap().series, expect);
        let one = elementary_series(&Elementary::Polynomial(vec![c(1.0)]), 1).unwrap();
        assert_eq!(product_series(&one, &v, 4).unwrap().series, v);
        assert_eq!(sum_series(&v, &VolterraSeries::empty()).unwrap(), v);
    }

    #[test]
    fn sum_and_product_outputs() {
        let mut r = rng(34);
        for _ in 0..10 {
            let a = random_series(&mut r, 2, 3);
            let b = random_series(&mut r, 2, 4);
            let s = random_signal(&mut r, 9);
            let ya = eval_time(&a, &s).unwrap();
            let yb = eval_time(&b, &s).unwrap();
            let sum = eval_time(&sum_series(&a, &b).unwrap(), &s).unwrap();
            let expect: Vec<Complex64> = ya.samples().iter().zip(yb.samples()).map(|(x, y)| x + y).collect();
            assert!(max_abs_diff(sum.samples(), &expect) <= 1e-10);
            let dis = eval_time(&disjoint_sum(&a, &b).unwrap(), &s).unwrap();
            assert!(max_abs_diff(dis.samples(), &expect) <= 1e-10);
            let prod = eval_time(&product_series(&a, &b, 4).unwrap().series, &s).unwrap();
            let expect = ya.pointwise(&yb).unwrap();
            assert!(max_abs_diff(prod.samples(), expect.samples()) <= 1e-9 * expect.max_abs().max(1.0));
        }
    }

    #[test]
    fn product_orders_collect_split_products() {
        let mut r = rng(35);
        let a = random_series(&mut r, 2, 2);
        let b = random_series(&mut r, 2, 2);
        let s = random_signal(&mut r, 6);
        let pa = eval_by_order(&a, &s).unwrap();
        let pb = eval_by_order(&b, &s).unwrap();
        let prod = product_series(&a, &b, 4).unwrap().series;
        let pp = eval_by_order(&prod, &s).unwrap();
        for (&j, yj) in &pp {
            let mut expect = vec![ZERO; 6];
            for (&k, yk) in &pa {
                if let Some(yl) = j.checked_sub(k).and_then(|l| pb.get(&l)) {
                    expect.iter_mut().zip(yk.pointwise(yl).unwrap().samples()).for_each(|(e, v)| *e += v);
                }
            }
            assert!(max_abs_diff(yj.samples(), &expect) < 1e-10);
        }
    }

    #[test]
    fn product_of_delays_is_tensor_product() {
        let mut r = rng(36);
        let ka = random_kernel(&mut r, 1, 3);
        let kb = random_kernel(&mut r, 1, 3);
        let a = VolterraSeries::from_kernels(vec![ka.clone()]).unwrap();
        let b = VolterraSeries::from_kernels(vec![kb.clone()]).unwrap();
        let p = product_series(&a, &b, 4).unwrap().series;
        assert_eq!(p.kernel_of_order(2), ka.tensor(&kb).unwrap());
    }

    #[test]
    fn label_sets_agree() {
        for (nc, nb, na) in [(2, 2, 2), (1, 2, 3), (3, 1, 2), (2, 3, 1)] {
            for j in 1..=6 {
                let mut l = labels_left_nested(nc, nb, na, j);
                let mut r = labels_right_nested(nc, nb, na, j);
                l.sort();
                r.sort();
                assert_eq!(l, r, "nc={nc} nb={nb} na={na} j={j}");
            }
        }
        // order 2, all orders 2: C1(B1(A2)), C1(B2(A1, A1)), C2(B1(A1), B1(A1))
        let l = labels_left_nested(2, 2, 2, 2);
        assert_eq!(l.len(), 3);
    }

    #[test]
    fn harness_on_a_small_triple() {
        let mut r = rng(37);
        let a = random_series_without_constant(&mut r, 2, 2);
        let b = random_series_without_constant(&mut r, 2, 2);
        let cc = random_series(&mut r, 2, 2);
        let rep = associativity_harness(&cc, &b, &a, 4, 3, 10, 7).unwrap();
        assert!(rep.max_kernel_deviation() <= 1e-8);
        assert!(rep.output_deviation <= 1e-8);
        assert!(rep.labels_match);
        assert!(!rep.truncations.is_empty());
    }
}
