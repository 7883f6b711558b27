//! Seeded random series, signals and multipliers for harnesses and tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::VolterraKernel;
use crate::series::VolterraSeries;
use crate::signal::{Multiplier, SampledSignal};

pub type HarnessRng = ChaCha8Rng;

pub fn rng(seed: u64) -> HarnessRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut impl Rng) -> Complex64 {
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn random_kernel(r: &mut impl Rng, order: usize, memory: usize) -> VolterraKernel {
    VolterraKernel::from_fn(order, memory, |_| random_complex(r))
}

/// Canonical series with every order in `0..=max_order` present with probability
/// 3/4 and a memory drawn from `1..=max_memory`.
pub fn random_series(r: &mut impl Rng, max_order: usize, max_memory: usize) -> VolterraSeries {
    let memory = r.random_range(1..=max_memory);
    let mut kernels = Vec::new();
    for j in 0..=max_order {
        if r.random_bool(0.75) {
            kernels.push(random_kernel(r, j, memory));
        }
    }
    VolterraSeries::from_kernels(kernels).expect("distinct orders")
}

/// Like [`random_series`] but without a constant term and with every order in
/// `1..=max_order` present.
pub fn random_series_without_constant(r: &mut impl Rng, max_order: usize, max_memory: usize) -> VolterraSeries {
    let memory = r.random_range(1..=max_memory);
    let kernels = (1..=max_order).map(|j| random_kernel(r, j, memory)).collect();
    VolterraSeries::from_kernels(kernels).expect("distinct orders")
}

pub fn random_signal(r: &mut impl Rng, length: usize) -> SampledSignal {
    SampledSignal::new((0..length).map(|_| random_complex(r)).collect()).expect("length >= 1")
}

/// Multiplier with unit-scale random entries.
pub fn random_multiplier(r: &mut impl Rng, length: usize) -> Multiplier {
    Multiplier::new((0..length).map(|_| random_complex(r)).collect()).expect("length >= 1")
}
