//! Coherent reception at a single anchor using the known beacon as pilot.

use num_complex::Complex64;

use crate::attack::AnchorObservation;
use crate::frame::{beacon_bits, bpsk_demodulate, bpsk_modulate, BitVector, FrameLayout};

/// Least-squares channel estimate over the beacon slots.
pub fn estimate_channel(obs: &AnchorObservation, layout: &FrameLayout) -> Complex64 {
    let pilots = bpsk_modulate(&beacon_bits(layout));
    let n = pilots.len().max(1) as f64;
    obs.beacon()
        .iter()
        .zip(&pilots)
        .map(|(r, p)| r * p.conj())
        .sum::<Complex64>()
        / n
}

/// Header samples rotated and scaled by the beacon-based channel estimate.
pub fn equalize_header(obs: &AnchorObservation, layout: &FrameLayout) -> Vec<Complex64> {
    let h = estimate_channel(obs, layout);
    let inv = if h.norm_sqr() > 0.0 {
        h.inv()
    } else {
        Complex64::new(1.0, 0.0)
    };
    obs.header().iter().map(|r| r * inv).collect()
}

pub fn decode_header(obs: &AnchorObservation, layout: &FrameLayout) -> BitVector {
    bpsk_demodulate(&equalize_header(obs, layout))
}
