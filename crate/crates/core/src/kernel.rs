//! Dense Volterra kernels `v_j : {0..M}^j -> C` and their frequency responses.
//!
//! A kernel of order `j` and memory `M` stores `M^j` entries in row-major order,
//! first delay slowest. Its VFRF at grid length `L >= M` is the `j`-dimensional DFT
//! of the kernel zero-embedded into `Z_L^j`:
//!
//! ```text
//! v_hat(K) = sum_tau v(tau) exp(-2 pi i <K, tau> / L)
//! ```

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::combinatorics::multinomial;
use crate::error::{contract, Result, VolterraError};
use crate::tensor::{cube_len, dft_cube, flat_index, next_index, unflatten};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolterraKernel {
    order: usize,
    memory: usize,
    data: Vec<Complex64>,
}

/// The VFRF of a kernel sampled on `Z_L^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolterraFrf {
    order: usize,
    length: usize,
    data: Vec<Complex64>,
}

impl VolterraKernel {
    pub fn new(order: usize, memory: usize, data: Vec<Complex64>) -> Result<Self> {
        if memory == 0 {
            return contract("kernel memory must be at least 1");
        }
        if data.len() != cube_len(memory, order) {
            return contract(format!(
                "order-{order} kernel with memory {memory} needs {} entries, got {}",
                cube_len(memory, order),
                data.len()
            ));
        }
        Ok(Self { order, memory, data })
    }

    pub fn zeros(order: usize, memory: usize) -> Self {
        let memory = memory.max(1);
        Self { order, memory, data: vec![Complex64::new(0.0, 0.0); cube_len(memory, order)] }
    }

    /// The order-0 kernel holding the constant `v0`.
    pub fn constant(v0: Complex64) -> Self {
        Self { order: 0, memory: 1, data: vec![v0] }
    }

    pub fn from_fn(order: usize, memory: usize, mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let mut k = Self::zeros(order, memory);
        let mut idx = vec![0usize; order];
        for slot in k.data.iter_mut() {
            *slot = f(&idx);
            next_index(&mut idx, k.memory);
        }
        k
    }

    /// `value` at `at`, zero elsewhere.
    pub fn delta(memory: usize, at: &[usize], value: Complex64) -> Result<Self> {
        if at.iter().any(|&a| a >= memory) {
            return Err(VolterraError::OutOfGrid { index: at.to_vec() });
        }
        let mut k = Self::zeros(at.len(), memory);
        k.data[flat_index(at, memory)] = value;
        Ok(k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, tau: &[usize]) -> Complex64 {
        debug_assert_eq!(tau.len(), self.order);
        self.data[flat_index(tau, self.memory)]
    }

    pub fn set(&mut self, tau: &[usize], value: Complex64) {
        let i = flat_index(tau, self.memory);
        self.data[i] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        crate::signal::max_abs(&self.data)
    }

    /// Zero-pad (or exactly truncate) to a new memory. Truncation must only drop zeros.
    pub fn with_memory(&self, memory: usize) -> Result<Self> {
        if memory == self.memory || self.order == 0 {
            return Ok(Self { memory: if self.order == 0 { 1 } else { memory }, ..self.clone() });
        }
        let mut out = Self::zeros(self.order, memory);
        let mut idx = vec![0usize; self.order];
        for &v in &self.data {
            if idx.iter().all(|&i| i < memory) {
                out.set(&idx, v);
            } else if v != Complex64::new(0.0, 0.0) {
                return contract(format!("cannot shrink memory to {memory}: nonzero entry at {idx:?}"));
            }
            next_index(&mut idx, self.memory);
        }
        Ok(out)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { data: self.data.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// Entry-wise sum; the smaller memory is zero-padded.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return contract("adding kernels of different orders");
        }
        let m = self.memory.max(other.memory);
        let mut a = self.with_memory(m)?;
        let b = other.with_memory(m)?;
        a.data.iter_mut().zip(&b.data).for_each(|(x, y)| *x += y);
        Ok(a)
    }

    /// `(a (x) b)(tau, sigma) = a(tau) b(sigma)`, of order `a.order + b.order`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let m = self.memory.max(other.memory);
        let a = self.with_memory(m)?;
        let b = other.with_memory(m)?;
        let mut data = Vec::with_capacity(a.data.len() * b.data.len());
        for x in &a.data {
            data.extend(b.data.iter().map(|y| x * y));
        }
        Self::new(a.order + b.order, m, data)
    }

    /// Average over all `j!` permutations of the delay arguments.
    pub fn symmetrize_plain(&self) -> Self {
        let perms = permutations(self.order);
        let scale = 1.0 / perms.len() as f64;
        self.symmetrize_with(|_| scale, &perms)
    }

    /// Sum over permutations divided by the number of distinct rearrangements
    /// `n*(tau) = j! / prod(n_i!)` of each delay tuple.
    pub fn symmetrize_weighted(&self) -> Self {
        let perms = permutations(self.order);
        let j = self.order;
        self.symmetrize_with(
            |tau| {
                let mut counts: Vec<usize> = Vec::new();
                let mut sorted = tau.to_vec();
                sorted.sort_unstable();
                for w in sorted.chunk_by(|a, b| a == b) {
                    counts.push(w.len());
                }
                1.0 / multinomial(j, &counts).expect("orders are small") as f64
            },
            &perms,
        )
    }

    fn symmetrize_with(&self, weight: impl Fn(&[usize]) -> f64, perms: &[Vec<usize>]) -> Self {
        if self.order <= 1 {
            return self.clone();
        }
        let j = self.order;
        let mut out = Self::zeros(j, self.memory);
        let mut tau = vec![0usize; j];
        let mut permuted = vec![0usize; j];
        for f in 0..self.data.len() {
            unflatten(f, self.memory, &mut tau);
            let mut acc = Complex64::new(0.0, 0.0);
            for p in perms {
                for (slot, &src) in permuted.iter_mut().zip(p) {
                    *slot = tau[src];
                }
                acc += self.get(&permuted);
            }
            out.data[f] = acc * weight(&tau);
        }
        out
    }

    /// Largest `|v(tau) - v(sigma tau)|` over all permutations `sigma`.
    pub fn asymmetry(&self) -> f64 {
        if self.order <= 1 {
            return 0.0;
        }
        let perms = permutations(self.order);
        let mut tau = vec![0usize; self.order];
        let mut permuted = vec![0usize; self.order];
        let mut worst = 0.0f64;
        for f in 0..self.data.len() {
            unflatten(f, self.memory, &mut tau);
            for p in &perms {
                for (slot, &src) in permuted.iter_mut().zip(p) {
                    *slot = tau[src];
                }
                worst = worst.max((self.data[f] - self.get(&permuted)).norm());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    /// VFRF on `Z_length^j`.
    pub fn vfrf(&self, length: usize) -> Result<VolterraFrf> {
        if self.order > 0 && self.memory > length {
            return Err(VolterraError::Resolution { memory: self.memory, length });
        }
        let padded = if self.order == 0 { self.clone() } else { self.with_memory(length)? };
        let mut data = padded.data;
        dft_cube(&mut data, length, self.order, FftDirection::Forward);
        Ok(VolterraFrf { order: self.order, length, data })
    }
}

impl VolterraFrf {
    pub fn from_data(order: usize, length: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != cube_len(length, order) {
            return contract("VFRF data length does not match L^j");
        }
        Ok(Self { order, length, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Value at a frequency vector, with every coordinate taken modulo `L`.
    pub fn at(&self, k: &[usize]) -> Complex64 {
        let l = self.length;
        let f = k.iter().fold(0, |acc, &i| acc * l + i % l);
        self.data[f]
    }

    /// Inverse transform, truncated to the first `memory` delays per axis.
    pub fn to_kernel(&self, memory: usize) -> Result<VolterraKernel> {
        if memory > self.length {
            return Err(VolterraError::Resolution { memory, length: self.length });
        }
        let mut data = self.data.clone();
        dft_cube(&mut data, self.length, self.order, FftDirection::Inverse);
        let scale = 1.0 / cube_len(self.length, self.order) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        let full = VolterraKernel { order: self.order, memory: self.length.max(1), data };
        if self.order == 0 {
            return Ok(full);
        }
        Ok(VolterraKernel::from_fn(self.order, memory, |tau| full.get(tau)))
    }
}

/// All permutations of `0..n` as index maps.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    permute(&mut cur, 0, &mut out);
    out
}

fn permute(cur: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start + 1 >= cur.len() {
        out.push(cur.clone());
        return;
    }
    for i in start..cur.len() {
        cur.swap(start, i);
        permute(cur, start + 1, out);
        cur.swap(start, i);
    }
}
