//! Weak compositions, compositions, multinomials and multicombinations.
//!
//! Enumeration order is lexicographic everywhere, so callers can rely on stable
//! term ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolterraError};

/// All `k`-tuples of non-negative integers summing to `j`, lexicographic.
///
/// There are `C(j + k - 1, k - 1)` of them.
pub fn weak_compositions(j: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return if j == 0 {
            Ok(vec![Vec::new()])
        } else {
            Err(VolterraError::EmptyDomain(format!("no weak composition of {j} into 0 parts")))
        };
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    fill_weak(j, 0, &mut cur, &mut out);
    Ok(out)
}

fn fill_weak(rest: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(cur.clone());
        return;
    }
    for v in 0..=rest {
        cur[pos] = v;
        fill_weak(rest - v, pos + 1, cur, out);
    }
}

/// All `m`-tuples of positive integers summing to `n`, lexicographic.
///
/// Empty when `m > n`. `compositions(0, 0)` is the single empty tuple.
pub fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if m > n {
        return Vec::new();
    }
    // shift a weak composition of n - m by one in every part
    weak_compositions(n - m, m)
        .expect("m >= 1")
        .into_iter()
        .map(|mut p| {
            p.iter_mut().for_each(|x| *x += 1);
            p
        })
        .collect()
}

/// `C(n, k)` with overflow detection.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(VolterraError::Overflow(format!("binomial({n}, {k})")));
        }
    }
    Ok(acc as u64)
}

/// `j! / prod(parts_i!)`, exact, with overflow detection.
pub fn multinomial(j: usize, parts: &[usize]) -> Result<u64> {
    let total: usize = parts.iter().sum();
    if total != j {
        return Err(VolterraError::Contract(format!("multinomial parts sum to {total}, expected {j}")));
    }
    // product of binomials C(n_1 + .. + n_i, n_i)
    let mut acc: u64 = 1;
    let mut run: u64 = 0;
    for &p in parts {
        run += p as u64;
        let b = binomial(run, p as u64)?;
        acc = acc.checked_mul(b).ok_or_else(|| VolterraError::Overflow(format!("multinomial({j}, {parts:?})")))?;
    }
    Ok(acc)
}

/// A multiset of size `j` drawn from `B` labelled classes, stored as class counts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Multicombination {
    counts: Vec<usize>,
}

impl Multicombination {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn size(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of distinct class assignments of `size()` ordered slots with these counts.
    pub fn multinomial(&self) -> Result<u64> {
        multinomial(self.size(), &self.counts)
    }

    /// The canonical slot assignment: the first `n_1` slots get class 0, the next `n_2` class 1, ...
    pub fn canonical_assignment(&self) -> Vec<usize> {
        self.counts.iter().enumerate().flat_map(|(class, &n)| std::iter::repeat_n(class, n)).collect()
    }
}

/// All size-`j` multisets over `b` classes, ordered lexicographically by their sorted
/// element lists. There are `C(b + j - 1, j)` of them.
pub fn multicombinations(b: usize, j: usize) -> Vec<Multicombination> {
    if b == 0 {
        return if j == 0 { vec![Multicombination::new(Vec::new())] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut elems = vec![0usize; j];
    loop {
        let mut counts = vec![0usize; b];
        elems.iter().for_each(|&e| counts[e] += 1);
        out.push(Multicombination::new(counts));
        // next non-decreasing sequence over 0..b
        let Some(pos) = (0..j).rev().find(|&p| elems[p] + 1 < b) else {
            return out;
        };
        let v = elems[pos] + 1;
        elems[pos..].iter_mut().for_each(|e| *e = v);
    }
}

/// Non-decreasing `j`-sequences drawn from `values`, each with its multinomial weight.
///
/// This is the form used when a symmetric summand over `values^j` is collected by
/// multiset: the sum over all `j`-tuples equals the weighted sum over these.
pub fn weighted_multisets<T: Copy>(values: &[T], j: usize) -> Result<Vec<(Vec<T>, u64)>> {
    multicombinations(values.len(), j)
        .into_iter()
        .map(|mc| {
            let w = mc.multinomial()?;
            let seq = mc.canonical_assignment().into_iter().map(|c| values[c]).collect();
            Ok((seq, w))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn factorial(n: usize) -> u128 {
        (1..=n as u128).product()
    }

    fn brute_weak(j: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let total = (j + 1).pow(k as u32);
        for f in 0..total {
            let mut v = vec![0; k];
            crate::tensor::unflatten(f, j + 1, &mut v);
            if v.iter().sum::<usize>() == j {
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn weak_compositions_examples() {
        assert_eq!(weak_compositions(2, 2).unwrap(), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(weak_compositions(0, 3).unwrap(), vec![vec![0, 0, 0]]);
        assert!(matches!(weak_compositions(1, 0), Err(VolterraError::EmptyDomain(_))));
        assert_eq!(weak_compositions(0, 0).unwrap(), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn compositions_examples() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(4, 4), vec![vec![1, 1, 1, 1]]);
        assert!(compositions(2, 3).is_empty());
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(3, &[1, 1, 1]).unwrap(), 6);
        assert_eq!(multinomial(4, &[2, 2]).unwrap(), 6);
        assert_eq!(multinomial(0, &[]).unwrap(), 1);
        assert!(multinomial(3, &[1, 1]).is_err());
        assert!(matches!(multinomial(40, &[1; 40]), Err(VolterraError::Overflow(_))));
    }

    #[test]
    fn multicombinations_examples() {
        let got: Vec<Vec<usize>> = multicombinations(2, 2).into_iter().map(|m| m.counts().to_vec()).collect();
        assert_eq!(got, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multicombinations(3, 0).len(), 1);
        assert_eq!(multicombinations(1, 4), vec![Multicombination::new(vec![4])]);
    }

    #[test]
    fn canonical_assignment_orders_classes() {
        let m = Multicombination::new(vec![2, 0, 1]);
        assert_eq!(m.canonical_assignment(), vec![0, 0, 2]);
    }

    #[test]
    fn weak_compositions_match_brute_force() {
        for j in 0..=6 {
            for k in 1..=4 {
                assert_eq!(weak_compositions(j, k).unwrap(), brute_weak(j, k), "j={j} k={k}");
            }
        }
    }

    // Exact identities, j, n <= 8 and k, B, m <= 5.
    #[test]
    fn counting_identities_exact() {
        for j in 0..=8usize {
            for k in 1..=5usize {
                let wc = weak_compositions(j, k).unwrap();
                assert_eq!(wc.len() as u64, binomial((j + k - 1) as u64, (k - 1) as u64).unwrap());
                // sum over weak compositions of multinomials is k^j
                let total: u64 = wc.iter().map(|p| multinomial(j, p).unwrap()).sum();
                assert_eq!(total, (k as u64).pow(j as u32));
            }
            for b in 1..=5usize {
                let mcs = multicombinations(b, j);
                assert_eq!(mcs.len() as u64, binomial((b + j - 1) as u64, j as u64).unwrap());
                let total: u64 = mcs.iter().map(|m| m.multinomial().unwrap()).sum();
                assert_eq!(total, (b as u64).pow(j as u32));
            }
        }
        for n in 1..=8usize {
            for m in 1..=5usize {
                let expect = if m > n { 0 } else { binomial((n - 1) as u64, (m - 1) as u64).unwrap() };
                assert_eq!(compositions(n, m).len() as u64, expect);
            }
        }
    }

    #[test]
    fn multinomial_matches_factorials() {
        for j in 0..=8usize {
            for k in 1..=4usize {
                for p in weak_compositions(j, k).unwrap() {
                    let expect = factorial(j) / p.iter().map(|&x| factorial(x)).product::<u128>();
                    assert_eq!(u128::from(multinomial(j, &p).unwrap()), expect);
                }
            }
        }
    }

    // Summing over all k^j index tuples equals summing over weak compositions with
    // multinomial weights, for a symmetric summand.
    #[test]
    fn pushing_sum_past_product() {
        let x = [0.7f64, -1.3, 2.1, 0.4];
        for j in 0..=5usize {
            for k in 1..=4usize {
                let mut brute = 0.0;
                let mut idx = vec![0usize; j];
                loop {
                    brute += idx.iter().map(|&i| x[i]).product::<f64>();
                    if !crate::tensor::next_index(&mut idx, k) {
                        break;
                    }
                }
                let collected: f64 = weak_compositions(j, k)
                    .unwrap()
                    .iter()
                    .map(|p| {
                        multinomial(j, p).unwrap() as f64
                            * p.iter().enumerate().map(|(i, &e)| x[i].powi(e as i32)).product::<f64>()
                    })
                    .sum();
                let expect = x[..k].iter().sum::<f64>().powi(j as i32);
                assert!((brute - expect).abs() < 1e-9 * expect.abs().max(1.0));
                assert!((collected - expect).abs() < 1e-9 * expect.abs().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn weak_compositions_sorted_and_summing(j in 0usize..7, k in 1usize..5) {
            let wc = weak_compositions(j, k).unwrap();
            prop_assert!(wc.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(wc.iter().all(|p| p.len() == k && p.iter().sum::<usize>() == j));
        }

        #[test]
        fn multicombinations_sorted_by_elements(b in 1usize..5, j in 0usize..6) {
            let seqs: Vec<Vec<usize>> = multicombinations(b, j)
                .iter()
                .map(|m| m.canonical_assignment())
                .collect();
            prop_assert!(seqs.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
