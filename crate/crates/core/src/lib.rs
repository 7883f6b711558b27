//! Volterra series on sampled signals.
//!
//! A series maps a signal `s` on the circular grid `Z_L` to
//! `y(t) = v0 + sum_j sum_tau v_j(tau) prod_r s(t - tau_r)`. This crate provides
//! dense kernels and their frequency responses, time and frequency evaluation,
//! the action of linear filters on series, morphisms between series, the
//! sum/product/composition algebra, and higher-order time-frequency
//! distributions expressed as Volterra kernels.

pub mod algebra;
pub mod catalog;
pub mod combinatorics;
pub mod dsl;
pub mod error;
pub mod eval;
pub mod functor;
pub mod kernel;
pub mod morphism;
pub mod random;
pub mod series;
pub mod signal;
pub mod tensor;
pub mod tfd;

pub use error::{Result, VolterraError};
pub use kernel::{VolterraFrf, VolterraKernel};
pub use series::{elementary_series, Elementary, TermIndex, VolterraSeries};
pub use signal::{Multiplier, SampledSignal, Spectrum};

pub use num_complex::Complex64;

/// Highest kernel order kept by products and compositions unless asked otherwise.
pub const DEFAULT_ORDER_CAP: usize = 4;
