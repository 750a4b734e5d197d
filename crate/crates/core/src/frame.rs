//! Three-partition frame: BPSK beacon, BPSK header, 16-QAM payload.
//!
//! Frames live at complex baseband with one sample per symbol. Both
//! constellations are normalized to unit average symbol energy.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Known beacon bit pattern shared by the legitimate transmitter, the
/// receivers and any spoofer that forges frames.
pub const BEACON_PATTERN: [u8; 8] = [1, 0, 1, 1, 0, 0, 1, 0];

const QAM_SCALE: f64 = 0.316_227_766_016_837_94; // 1/sqrt(10)

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("bit count {0} is not a multiple of 4")]
    NotMultipleOfFour(usize),
    #[error("{partition} partition expects {expected} bits, got {got}")]
    LengthMismatch {
        partition: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("bit vectors differ in length ({0} vs {1})")]
    UnequalLengths(usize, usize),
    #[error("empty bit vector")]
    Empty,
    #[error("invalid bit value {0}")]
    InvalidBit(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qam16 => 4,
        }
    }
}

/// Sizes and modulations of the three frame partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub beacon_bits: usize,
    pub header_bits: usize,
    pub payload_bits: usize,
    pub beacon_mod: Modulation,
    pub header_mod: Modulation,
    pub payload_mod: Modulation,
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self {
            beacon_bits: 8,
            header_bits: 8,
            payload_bits: 96,
            beacon_mod: Modulation::Bpsk,
            header_mod: Modulation::Bpsk,
            payload_mod: Modulation::Qam16,
        }
    }
}

impl FrameLayout {
    pub fn beacon_symbols(&self) -> usize {
        self.beacon_bits / self.beacon_mod.bits_per_symbol()
    }

    pub fn header_symbols(&self) -> usize {
        self.header_bits / self.header_mod.bits_per_symbol()
    }

    pub fn payload_symbols(&self) -> usize {
        self.payload_bits / self.payload_mod.bits_per_symbol()
    }

    pub fn total_symbols(&self) -> usize {
        self.beacon_symbols() + self.header_symbols() + self.payload_symbols()
    }

    /// Symbol index ranges of beacon, header and payload.
    pub fn ranges(&self) -> [std::ops::Range<usize>; 3] {
        let b = self.beacon_symbols();
        let h = b + self.header_symbols();
        [0..b, b..h, h..self.total_symbols()]
    }
}

/// Ordered bit sequence, one `u8` in {0, 1} per bit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitVector(pub Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self, FrameError> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(FrameError::InvalidBit(b));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random_range(0..=1u8)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| b ^ 1).collect())
    }
}

impl From<&[u8]> for BitVector {
    fn from(bits: &[u8]) -> Self {
        Self(bits.iter().map(|b| b & 1).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBits {
    pub beacon: BitVector,
    pub header: BitVector,
    pub payload: BitVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedFrame {
    pub layout: FrameLayout,
    pub beacon: Vec<Complex64>,
    pub header: Vec<Complex64>,
    pub payload: Vec<Complex64>,
    pub tx_bits: FrameBits,
}

impl ModulatedFrame {
    /// All partitions concatenated in transmission order.
    pub fn symbols(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.layout.total_symbols());
        out.extend_from_slice(&self.beacon);
        out.extend_from_slice(&self.header);
        out.extend_from_slice(&self.payload);
        out
    }
}

pub fn bpsk_modulate(bits: &BitVector) -> Vec<Complex64> {
    bits.0
        .iter()
        .map(|&b| Complex64::new(if b == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect()
}

/// Hard decision on the real part; `Re == 0` resolves to bit 0.
pub fn bpsk_demodulate(symbols: &[Complex64]) -> BitVector {
    BitVector(symbols.iter().map(|s| u8::from(s.re < 0.0)).collect())
}

// Gray pair -> amplitude level: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
fn gray_level(b0: u8, b1: u8) -> f64 {
    match (b0, b1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

fn slice_level(x: f64) -> (u8, u8) {
    let scaled = x / QAM_SCALE;
    if scaled < -2.0 {
        (0, 0)
    } else if scaled < 0.0 {
        (0, 1)
    } else if scaled < 2.0 {
        (1, 1)
    } else {
        (1, 0)
    }
}

/// Gray-mapped square 16-QAM; the first two bits of each quadruple pick the
/// in-phase level, the last two the quadrature level.
pub fn qam16_modulate(bits: &BitVector) -> Result<Vec<Complex64>, FrameError> {
    if !bits.len().is_multiple_of(4) {
        return Err(FrameError::NotMultipleOfFour(bits.len()));
    }
    Ok(bits
        .0
        .chunks_exact(4)
        .map(|q| {
            Complex64::new(
                gray_level(q[0], q[1]) * QAM_SCALE,
                gray_level(q[2], q[3]) * QAM_SCALE,
            )
        })
        .collect())
}

/// Minimum-distance hard decision. For a square constellation the nearest
/// point is found by slicing each axis independently.
pub fn qam16_demodulate(symbols: &[Complex64]) -> BitVector {
    let mut out = Vec::with_capacity(symbols.len() * 4);
    for s in symbols {
        let (i0, i1) = slice_level(s.re);
        let (q0, q1) = slice_level(s.im);
        out.extend_from_slice(&[i0, i1, q0, q1]);
    }
    BitVector(out)
}

/// All sixteen constellation points, indexed by their 4-bit label (MSB first).
pub fn qam16_constellation() -> Vec<(BitVector, Complex64)> {
    (0u8..16)
        .map(|label| {
            let bits = BitVector((0..4).rev().map(|k| (label >> k) & 1).collect());
            let sym = qam16_modulate(&bits).expect("4 bits")[0];
            (bits, sym)
        })
        .collect()
}

pub fn modulate(bits: &BitVector, modulation: Modulation) -> Result<Vec<Complex64>, FrameError> {
    match modulation {
        Modulation::Bpsk => Ok(bpsk_modulate(bits)),
        Modulation::Qam16 => qam16_modulate(bits),
    }
}

pub fn demodulate(symbols: &[Complex64], modulation: Modulation) -> BitVector {
    match modulation {
        Modulation::Bpsk => bpsk_demodulate(symbols),
        Modulation::Qam16 => qam16_demodulate(symbols),
    }
}

pub fn build_frame(
    beacon_bits: BitVector,
    header_bits: BitVector,
    payload_bits: BitVector,
    layout: &FrameLayout,
) -> Result<ModulatedFrame, FrameError> {
    for (partition, expected, got) in [
        ("beacon", layout.beacon_bits, beacon_bits.len()),
        ("header", layout.header_bits, header_bits.len()),
        ("payload", layout.payload_bits, payload_bits.len()),
    ] {
        if expected != got {
            return Err(FrameError::LengthMismatch {
                partition,
                expected,
                got,
            });
        }
    }
    Ok(ModulatedFrame {
        layout: *layout,
        beacon: modulate(&beacon_bits, layout.beacon_mod)?,
        header: modulate(&header_bits, layout.header_mod)?,
        payload: modulate(&payload_bits, layout.payload_mod)?,
        tx_bits: FrameBits {
            beacon: beacon_bits,
            header: header_bits,
            payload: payload_bits,
        },
    })
}

/// Known beacon bits repeated or truncated to the layout's beacon length.
pub fn beacon_bits(layout: &FrameLayout) -> BitVector {
    BitVector(
        BEACON_PATTERN
            .iter()
            .copied()
            .cycle()
            .take(layout.beacon_bits)
            .collect(),
    )
}

/// A frame with the known beacon and random header and payload bits.
pub fn random_frame<R: Rng + ?Sized>(layout: &FrameLayout, rng: &mut R) -> ModulatedFrame {
    let header = BitVector::random(layout.header_bits, rng);
    let payload = BitVector::random(layout.payload_bits, rng);
    build_frame(beacon_bits(layout), header, payload, layout).expect("lengths follow the layout")
}

/// Bit error count between two equal-length vectors.
pub fn bit_errors(tx: &BitVector, rx: &BitVector) -> Result<usize, FrameError> {
    if tx.len() != rx.len() {
        return Err(FrameError::UnequalLengths(tx.len(), rx.len()));
    }
    Ok(tx.0.iter().zip(&rx.0).filter(|(a, b)| a != b).count())
}

pub fn bit_error_rate(tx: &BitVector, rx: &BitVector) -> Result<f64, FrameError> {
    if tx.is_empty() {
        return Err(FrameError::Empty);
    }
    Ok(bit_errors(tx, rx)? as f64 / tx.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bpsk_map() {
        assert_eq!(bpsk_modulate(&BitVector(vec![0])), vec![c(1.0, 0.0)]);
        assert_eq!(bpsk_modulate(&BitVector(vec![1])), vec![c(-1.0, 0.0)]);
    }

    #[test]
    fn bpsk_sign_rule() {
        assert_eq!(bpsk_demodulate(&[c(0.3, -0.9)]).0, vec![0]);
        assert_eq!(bpsk_demodulate(&[c(-0.001, 0.0)]).0, vec![1]);
        assert_eq!(bpsk_demodulate(&[c(0.0, 5.0)]).0, vec![0]);
    }

    #[test]
    fn qam_unit_energy() {
        let pts = qam16_constellation();
        let e: f64 = pts.iter().map(|(_, s)| s.norm_sqr()).sum::<f64>() / 16.0;
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qam_rejects_odd_lengths() {
        assert_eq!(
            qam16_modulate(&BitVector::zeros(6)),
            Err(FrameError::NotMultipleOfFour(6))
        );
    }

    #[test]
    fn qam_96_bits_give_24_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits = BitVector::random(96, &mut rng);
        let syms = qam16_modulate(&bits).unwrap();
        assert_eq!(syms.len(), 24);
        assert_eq!(qam16_demodulate(&syms), bits);
    }

    #[test]
    fn qam_perturbation_inside_decision_region() {
        let half_min = 1.0 / 10f64.sqrt(); // half of 2/sqrt(10)
        for (label, p) in qam16_constellation() {
            assert_eq!(qam16_demodulate(&[p]), label);
            for dir in [c(1.0, 0.0), c(0.0, -1.0), c(0.7, 0.7)] {
                let q = p + dir * (0.95 * half_min / dir.norm());
                assert_eq!(qam16_demodulate(&[q]), label);
            }
        }
    }

    #[test]
    fn default_frame_layout() {
        let layout = FrameLayout::default();
        let frame = build_frame(
            BitVector::zeros(8),
            BitVector::zeros(8),
            BitVector::zeros(96),
            &layout,
        )
        .unwrap();
        assert_eq!(frame.symbols().len(), 40);
        assert_eq!(frame.beacon.len(), 8);
        assert_eq!(frame.tx_bits.payload, BitVector::zeros(96));
        assert_eq!(layout.ranges()[2], 16..40);
    }

    #[test]
    fn build_frame_length_mismatch() {
        let err = build_frame(
            BitVector::zeros(7),
            BitVector::zeros(8),
            BitVector::zeros(96),
            &FrameLayout::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            FrameError::LengthMismatch {
                partition: "beacon",
                ..
            }
        ));
    }

    #[test]
    fn ber_values() {
        let a = BitVector(vec![0, 1, 1, 0, 1, 0, 0, 1]);
        assert_eq!(bit_error_rate(&a, &a).unwrap(), 0.0);
        assert_eq!(bit_error_rate(&a, &a.complement()).unwrap(), 1.0);
        let mut b = a.clone();
        b.0[3] ^= 1;
        assert_eq!(bit_error_rate(&a, &b).unwrap(), 0.125);
        assert!(bit_error_rate(&a, &BitVector::zeros(3)).is_err());
    }

    #[test]
    fn invalid_bits_rejected() {
        assert_eq!(BitVector::new(vec![0, 2]), Err(FrameError::InvalidBit(2)));
    }

    proptest! {
        #[test]
        fn round_trip_both_constellations(bits in proptest::collection::vec(0u8..=1, 1..64)) {
            let bv = BitVector(bits.clone());
            prop_assert_eq!(bpsk_demodulate(&bpsk_modulate(&bv)), bv.clone());
            let n = bits.len() / 4 * 4;
            if n > 0 {
                let q = BitVector(bits[..n].to_vec());
                prop_assert_eq!(qam16_demodulate(&qam16_modulate(&q).unwrap()), q);
            }
        }

        #[test]
        fn axis_slicing_matches_brute_force(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let s = c(re, im);
            let pts = qam16_constellation();
            let (best, _) = pts
                .iter()
                .min_by(|a, b| (a.1 - s).norm_sqr().partial_cmp(&(b.1 - s).norm_sqr()).unwrap())
                .unwrap();
            // skip points equidistant from two labels
            let d: Vec<f64> = pts.iter().map(|(_, p)| (p - s).norm_sqr()).collect();
            let mut sorted = d.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assume!(sorted[1] - sorted[0] > 1e-9);
            prop_assert_eq!(&qam16_demodulate(&[s]), best);
        }
    }
}
