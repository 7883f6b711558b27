//! Volterra series: indexed families of kernels sharing one memory length.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::kernel::VolterraKernel;

/// Opaque label of one kernel in a series.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermIndex(pub String);

impl TermIndex {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    /// Label used by canonical series for the order-`j` kernel.
    pub fn for_order(j: usize) -> Self {
        Self(j.to_string())
    }
}

impl fmt::Display for TermIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub index: TermIndex,
    pub kernel: VolterraKernel,
}

/// A finite Volterra series. Several terms may share an order; evaluation sums them.
#[derive(Clone, Debug, PartialEq)]
pub struct VolterraSeries {
    memory: usize,
    terms: Vec<Term>,
}

impl VolterraSeries {
    /// Series with arbitrary labels. Labels must be unique; memories are zero-padded
    /// to the largest one.
    pub fn from_terms(terms: Vec<(TermIndex, VolterraKernel)>) -> Result<Self> {
        let memory = terms.iter().filter(|(_, k)| k.order() > 0).map(|(_, k)| k.memory()).max().unwrap_or(1);
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(terms.len());
        for (index, kernel) in terms {
            if !seen.insert(index.clone()) {
                return contract(format!("duplicate term index `{index}`"));
            }
            out.push(Term { index, kernel: kernel.with_memory(memory)? });
        }
        Ok(Self { memory, terms: out })
    }

    /// Canonical series: one term per order, labelled by the order. Kernels of equal
    /// order are summed.
    pub fn from_kernels(kernels: Vec<VolterraKernel>) -> Result<Self> {
        let mut by_order: BTreeMap<usize, VolterraKernel> = BTreeMap::new();
        for k in kernels {
            let merged = match by_order.remove(&k.order()) {
                Some(prev) => prev.add(&k)?,
                None => k,
            };
            by_order.insert(merged.order(), merged);
        }
        Self::from_terms(by_order.into_values().map(|k| (TermIndex::for_order(k.order()), k)).collect())
    }

    pub fn empty() -> Self {
        Self { memory: 1, terms: Vec::new() }
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, index: &TermIndex) -> Option<&Term> {
        self.terms.iter().find(|t| &t.index == index)
    }

    pub fn order_of(&self, index: &TermIndex) -> Option<usize> {
        self.term(index).map(|t| t.kernel.order())
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.kernel.order()).max().unwrap_or(0)
    }

    /// Distinct orders present, ascending.
    pub fn orders(&self) -> Vec<usize> {
        let mut o: Vec<usize> = self.terms.iter().map(|t| t.kernel.order()).collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    /// Sum of all kernels of order `j` (zero if none).
    pub fn kernel_of_order(&self, j: usize) -> VolterraKernel {
        self.terms
            .iter()
            .filter(|t| t.kernel.order() == j)
            .fold(VolterraKernel::zeros(j, self.memory), |acc, t| acc.add(&t.kernel).expect("orders agree"))
    }

    /// The zeroth-order constant `v0`.
    pub fn constant(&self) -> Complex64 {
        self.kernel_of_order(0).data()[0]
    }

    pub fn is_canonical(&self) -> bool {
        self.terms.iter().all(|t| t.index == TermIndex::for_order(t.kernel.order()))
            && self.orders().len() == self.terms.len()
    }

    pub fn to_canonical(&self) -> Self {
        let kernels = self.orders().into_iter().map(|j| self.kernel_of_order(j)).collect();
        Self::from_kernels(kernels).expect("orders are distinct")
    }

    pub fn with_memory(&self, memory: usize) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok(Term { index: t.index.clone(), kernel: t.kernel.with_memory(memory)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { memory, terms })
    }

    /// Same labels, every kernel replaced by its plain symmetrization.
    pub fn symmetrized(&self) -> Self {
        self.map_kernels(VolterraKernel::symmetrize_plain)
    }

    pub fn map_kernels(&self, f: impl Fn(&VolterraKernel) -> VolterraKernel) -> Self {
        let terms = self.terms.iter().map(|t| Term { index: t.index.clone(), kernel: f(&t.kernel) }).collect();
        Self { memory: self.memory, terms }
    }

    /// Drop every term of order above `cap`; returns the dropped orders.
    pub fn truncated(&self, cap: usize) -> (Self, Vec<usize>) {
        let dropped: Vec<usize> = self.orders().into_iter().filter(|&j| j > cap).collect();
        let terms = self.terms.iter().filter(|t| t.kernel.order() <= cap).cloned().collect();
        (Self { memory: self.memory, terms }, dropped)
    }
}

/// Closed-form building blocks.
#[derive(Clone, Debug, PartialEq)]
pub enum Elementary {
    /// `y(t) = s(t - d)`.
    Delay(usize),
    /// `r`-fold backward difference, stencil `[1, -1]` convolved `r` times.
    Differencer(usize),
    /// Memoryless polynomial `y = a_0 + a_1 s + ... + a_N s^N`.
    Polynomial(Vec<Complex64>),
    Identity,
}

/// Build an elementary series with kernel memory `memory`.
pub fn elementary_series(kind: &Elementary, memory: usize) -> Result<VolterraSeries> {
    let one = Complex64::new(1.0, 0.0);
    match kind {
        Elementary::Delay(d) => {
            if *d >= memory {
                return contract(format!("delay {d} needs memory > {d}, got {memory}"));
            }
            VolterraSeries::from_kernels(vec![VolterraKernel::delta(memory, &[*d], one)?])
        }
        Elementary::Differencer(r) => {
            if *r >= memory {
                return contract(format!("differencer of order {r} needs memory > {r}, got {memory}"));
            }
            let mut stencil = vec![one];
            for _ in 0..*r {
                let mut next = vec![Complex64::new(0.0, 0.0); stencil.len() + 1];
                for (i, &c) in stencil.iter().enumerate() {
                    next[i] += c;
                    next[i + 1] -= c;
                }
                stencil = next;
            }
            stencil.resize(memory, Complex64::new(0.0, 0.0));
            VolterraSeries::from_kernels(vec![VolterraKernel::new(1, memory, stencil)?])
        }
        Elementary::Polynomial(coeffs) => {
            if coeffs.len() > crate::DEFAULT_ORDER_CAP + 1 {
                return contract(format!(
                    "polynomial degree {} exceeds the order cap {}",
                    coeffs.len() - 1,
                    crate::DEFAULT_ORDER_CAP
                ));
            }
            let kernels = coeffs
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
                .map(|(n, &a)| {
                    if n == 0 {
                        Ok(VolterraKernel::constant(a))
                    } else {
                        VolterraKernel::delta(memory, &vec![0; n], a)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            VolterraSeries::from_kernels(kernels)
        }
        Elementary::Identity => elementary_series(&Elementary::Delay(0), memory),
    }
}
