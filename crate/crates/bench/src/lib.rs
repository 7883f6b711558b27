//! Fixtures shared by the criterion benches.

use volterra_core::random::{random_series, random_series_without_constant, random_signal, rng};
use volterra_core::tfd::{chirp, PolynomialPhase};
use volterra_core::{SampledSignal, VolterraSeries};

/// A series with orders up to `max_order` and memory `memory`, plus a signal of length `length`.
pub fn series_and_signal(max_order: usize, memory: usize, length: usize, seed: u64) -> (VolterraSeries, SampledSignal) {
    let mut r = rng(seed);
    let mut series = random_series(&mut r, max_order, memory);
    while series.memory() != memory || series.max_order() != max_order {
        series = random_series(&mut r, max_order, memory);
    }
    (series, random_signal(&mut r, length))
}

/// Three order-2 series without constants, for composition benches.
pub fn composition_triple(memory: usize, seed: u64) -> [VolterraSeries; 3] {
    let mut r = rng(seed);
    [
        random_series_without_constant(&mut r, 2, memory),
        random_series_without_constant(&mut r, 2, memory),
        random_series_without_constant(&mut r, 2, memory),
    ]
}

/// Linear chirp of length `length` sweeping 0.05 to 0.45 cycles per sample.
pub fn linear_chirp(length: usize) -> SampledSignal {
    let n = length as f64;
    let f0 = 0.05;
    let rate = 0.4 / n;
    let two_pi = 2.0 * std::f64::consts::PI;
    let phase = PolynomialPhase::new(vec![0.0, two_pi * f0, two_pi * rate / 2.0]);
    chirp(&phase, 1.0, length).expect("length >= 1")
}
