//! Two detectors: a beacon/header power-gap test aimed at beacon-synchronized
//! attacks, and a KL-divergence test comparing the envelope distribution of a
//! window of frames against attack-free traffic.

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::attack::AnchorObservation;
use crate::channel::{mean_power_mw, mw_to_dbm};
use crate::frame::{bit_errors, FrameBits};
use crate::receiver::decode_header;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("empty observation window")]
    EmptyWindow,
    #[error("no samples to build a histogram from")]
    EmptyInput,
    #[error("need at least {need} attack-free frames for the baseline, got {got}")]
    InsufficientFrames { need: usize, got: usize },
    #[error("window holds {got} frames, detector expects {expected}")]
    WindowSize { expected: usize, got: usize },
    #[error("histogram layouts differ")]
    LayoutMismatch,
    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),
    #[error("no flags to compute a rate from")]
    NoFlags,
    #[error("frame {frame} has {got} anchor observations, expected a non-zero count matching the first frame")]
    Ragged { frame: usize, got: usize },
}

/// Detector parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub bins: usize,
    pub hist_max: f64,
    pub smoothing_floor: f64,
    pub threshold: f64,
    pub window_frames: usize,
    pub baseline_frames: usize,
    pub calibration_windows: usize,
    /// Replace `threshold` with the largest KL seen on attack-free
    /// calibration windows.
    pub calibrate_threshold: bool,
    pub gap_threshold_db: f64,
    /// Anchors whose header power is below noise plus this margin are ignored
    /// by the frame-level power-gap rule.
    pub min_header_snr_db: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            bins: 32,
            hist_max: 4.0,
            smoothing_floor: 1e-9,
            threshold: 0.008,
            window_frames: 100,
            baseline_frames: 5000,
            calibration_windows: 200,
            calibrate_threshold: true,
            gap_threshold_db: 3.0,
            min_header_snr_db: 10.0,
        }
    }
}

impl DetectorConfig {
    pub fn histogram_layout(&self) -> HistogramLayout {
        HistogramLayout {
            bins: self.bins,
            max: self.hist_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentStats {
    pub beacon_power_dbm: f64,
    pub header_power_dbm: f64,
    pub payload_power_dbm: f64,
    pub header_ber: f64,
}

fn power_dbm(samples: &[Complex64]) -> f64 {
    mw_to_dbm(mean_power_mw(samples))
}

/// Mean power of each partition (floored at -200 dBm) and the header BER
/// after beacon-aided equalization.
pub fn partition_power_stats(obs: &AnchorObservation, tx_bits: &FrameBits) -> ComponentStats {
    let rx = decode_header(obs, &obs.layout);
    let errors = bit_errors(&tx_bits.header, &rx).unwrap_or(tx_bits.header.len());
    let header_ber = if tx_bits.header.is_empty() {
        0.0
    } else {
        errors as f64 / tx_bits.header.len() as f64
    };
    ComponentStats {
        beacon_power_dbm: power_dbm(obs.beacon()),
        header_power_dbm: power_dbm(obs.header()),
        payload_power_dbm: power_dbm(obs.payload()),
        header_ber,
    }
}

pub fn power_gap_detect(stats: &ComponentStats, gap_threshold_db: f64) -> bool {
    stats.beacon_power_dbm - stats.header_power_dbm > gap_threshold_db
}

/// Frame-level power-gap rule over all anchors: flags when any anchor that
/// hears the header clearly sees a beacon stronger than its header by more
/// than the gap threshold.
pub fn frame_gap_flag(
    observations: &[AnchorObservation],
    cfg: &DetectorConfig,
    noise_power_dbm: f64,
) -> bool {
    observations.iter().any(|o| {
        let header = power_dbm(o.header());
        header >= noise_power_dbm + cfg.min_header_snr_db
            && power_gap_detect(
                &ComponentStats {
                    beacon_power_dbm: power_dbm(o.beacon()),
                    header_power_dbm: header,
                    payload_power_dbm: f64::NAN,
                    header_ber: 0.0,
                },
                cfg.gap_threshold_db,
            )
    })
}

/// Envelope `|s|` of every beacon sample in the window, divided by the
/// window's mean envelope. Input is one receiver's beacon partitions.
pub fn envelope_observable(beacons: &[&[Complex64]]) -> Result<Vec<f64>, DetectionError> {
    let env: Vec<f64> = beacons
        .iter()
        .flat_map(|b| b.iter().map(|s| s.norm()))
        .collect();
    if env.is_empty() {
        return Err(DetectionError::EmptyWindow);
    }
    let mean = env.iter().sum::<f64>() / env.len() as f64;
    if mean > 0.0 {
        Ok(env.into_iter().map(|e| e / mean).collect())
    } else {
        Ok(vec![1.0; env.len()])
    }
}

/// [`envelope_observable`] of each anchor's beacon stream, concatenated.
/// `window[f][j]` is frame `f` at anchor `j`.
pub fn pooled_envelope_observable(
    window: &[Vec<AnchorObservation>],
) -> Result<Vec<f64>, DetectionError> {
    let anchors = window.first().ok_or(DetectionError::EmptyWindow)?.len();
    if anchors == 0 {
        return Err(DetectionError::Ragged { frame: 0, got: 0 });
    }
    if let Some((frame, f)) = window.iter().enumerate().find(|(_, f)| f.len() != anchors) {
        return Err(DetectionError::Ragged {
            frame,
            got: f.len(),
        });
    }
    let mut out = Vec::new();
    for j in 0..anchors {
        let beacons: Vec<&[Complex64]> = window.iter().map(|f| f[j].beacon()).collect();
        out.extend(envelope_observable(&beacons)?);
    }
    Ok(out)
}

/// Equal-width bins on `[0, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramLayout {
    pub bins: usize,
    pub max: f64,
}

impl Default for HistogramLayout {
    fn default() -> Self {
        Self { bins: 32, max: 4.0 }
    }
}

impl HistogramLayout {
    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.bins)
            .map(|i| self.max * i as f64 / self.bins as f64)
            .collect()
    }

    fn bin_of(&self, v: f64) -> usize {
        let idx = (v / self.max * self.bins as f64).floor();
        if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(self.bins - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub layout: HistogramLayout,
    pub probabilities: Vec<f64>,
    pub smoothing_floor: f64,
}

impl Histogram {
    /// Wraps explicit probabilities; they must be positive and sum to one.
    pub fn from_probabilities(
        layout: HistogramLayout,
        probabilities: Vec<f64>,
    ) -> Result<Self, DetectionError> {
        if probabilities.len() != layout.bins {
            return Err(DetectionError::InvalidHistogram(format!(
                "{} probabilities for {} bins",
                probabilities.len(),
                layout.bins
            )));
        }
        if probabilities.iter().any(|p| !(*p > 0.0)) {
            return Err(DetectionError::InvalidHistogram(
                "non-positive probability".into(),
            ));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DetectionError::InvalidHistogram(format!(
                "probabilities sum to {sum}"
            )));
        }
        let smoothing_floor = probabilities.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            layout,
            probabilities,
            smoothing_floor,
        })
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        self.layout.bin_edges()
    }
}

/// Normalized counts mixed with a uniform floor, so every bin carries at
/// least `smoothing_floor` and the total stays exactly one.
pub fn empirical_histogram(
    samples: &[f64],
    layout: HistogramLayout,
    smoothing_floor: f64,
) -> Result<Histogram, DetectionError> {
    if samples.is_empty() {
        return Err(DetectionError::EmptyInput);
    }
    if layout.bins == 0 || !(layout.max > 0.0) {
        return Err(DetectionError::InvalidHistogram("empty layout".into()));
    }
    let mass = smoothing_floor * layout.bins as f64;
    if !(0.0..1.0).contains(&mass) {
        return Err(DetectionError::InvalidHistogram(format!(
            "smoothing floor {smoothing_floor} too large for {} bins",
            layout.bins
        )));
    }
    let mut counts = vec![0usize; layout.bins];
    for &v in samples {
        counts[layout.bin_of(v)] += 1;
    }
    let n = samples.len() as f64;
    let probabilities = counts
        .iter()
        .map(|&c| smoothing_floor + (1.0 - mass) * c as f64 / n)
        .collect();
    Ok(Histogram {
        layout,
        probabilities,
        smoothing_floor,
    })
}

/// `sum p_i ln(p_i / q_i)` in nats.
pub fn kl_divergence(p: &Histogram, q: &Histogram) -> Result<f64, DetectionError> {
    if p.layout != q.layout || p.probabilities.len() != q.probabilities.len() {
        return Err(DetectionError::LayoutMismatch);
    }
    Ok(p.probabilities
        .iter()
        .zip(&q.probabilities)
        .map(|(&pi, &qi)| if pi > 0.0 { pi * (pi / qi).ln() } else { 0.0 })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlDetector {
    pub baseline: Histogram,
    pub threshold: f64,
    pub window_frames: usize,
}

/// Baseline histogram from attack-free frames, processed in windows of
/// `window_frames` exactly as detection windows are. A trailing partial
/// window is dropped.
pub fn calibrate_baseline(
    frames: &[Vec<AnchorObservation>],
    cfg: &DetectorConfig,
) -> Result<KlDetector, DetectionError> {
    let need = (cfg.window_frames * 10).max(1);
    if frames.len() < need {
        return Err(DetectionError::InsufficientFrames {
            need,
            got: frames.len(),
        });
    }
    let mut samples = Vec::new();
    for window in frames.chunks_exact(cfg.window_frames) {
        samples.extend(pooled_envelope_observable(window)?);
    }
    Ok(KlDetector {
        baseline: empirical_histogram(&samples, cfg.histogram_layout(), cfg.smoothing_floor)?,
        threshold: cfg.threshold,
        window_frames: cfg.window_frames,
    })
}

/// KL of one window against the baseline, without the size check.
pub fn window_kl(
    detector: &KlDetector,
    window: &[Vec<AnchorObservation>],
) -> Result<f64, DetectionError> {
    let obs = pooled_envelope_observable(window)?;
    let h = empirical_histogram(
        &obs,
        detector.baseline.layout,
        detector.baseline.smoothing_floor,
    )?;
    kl_divergence(&h, &detector.baseline)
}

pub fn kl_detect(
    detector: &KlDetector,
    window: &[Vec<AnchorObservation>],
) -> Result<(f64, bool), DetectionError> {
    if window.len() != detector.window_frames {
        return Err(DetectionError::WindowSize {
            expected: detector.window_frames,
            got: window.len(),
        });
    }
    let kl = window_kl(detector, window)?;
    Ok((kl, kl > detector.threshold))
}

/// Smallest threshold that flags none of the given attack-free KL values.
pub fn calibrate_threshold(benign_kl: &[f64]) -> Result<f64, DetectionError> {
    benign_kl
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(DetectionError::EmptyInput)
}

pub fn flag_rate(flags: &[bool]) -> Result<f64, DetectionError> {
    if flags.is_empty() {
        return Err(DetectionError::NoFlags);
    }
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

/// (detection rate, false-alarm rate).
pub fn detection_rates(
    attack_flags: &[bool],
    benign_flags: &[bool],
) -> Result<(f64, f64), DetectionError> {
    Ok((flag_rate(attack_flags)?, flag_rate(benign_flags)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::frame::{random_frame, FrameLayout};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stats(b: f64, h: f64) -> ComponentStats {
        ComponentStats {
            beacon_power_dbm: b,
            header_power_dbm: h,
            payload_power_dbm: h,
            header_ber: 0.0,
        }
    }

    #[test]
    fn gap_rule() {
        assert!(!power_gap_detect(&stats(-50.0, -50.0), 3.0));
        assert!(power_gap_detect(&stats(-40.0, -50.0), 3.0));
        assert!(!power_gap_detect(&stats(-47.0, -50.0), 3.0));
    }

    #[test]
    fn zero_samples_hit_the_floor() {
        let layout = FrameLayout::default();
        let frame = random_frame(&layout, &mut ChaCha8Rng::seed_from_u64(1));
        let obs = AnchorObservation {
            layout,
            samples: vec![Complex64::new(0.0, 0.0); 40],
        };
        let s = partition_power_stats(&obs, &frame.tx_bits);
        assert_eq!(s.beacon_power_dbm, -200.0);
        assert_eq!(s.header_power_dbm, -200.0);
        assert_eq!(s.payload_power_dbm, -200.0);
        assert!((0.0..=1.0).contains(&s.header_ber));
    }

    #[test]
    fn constant_envelope_is_all_ones() {
        let a = vec![Complex64::from_polar(3.0, 0.3); 8];
        let b = vec![Complex64::from_polar(3.0, -2.0); 8];
        let obs = envelope_observable(&[&a, &b]).unwrap();
        assert!(obs.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert_eq!(envelope_observable(&[]), Err(DetectionError::EmptyWindow));
    }

    #[test]
    fn rayleigh_envelope_spread() {
        // Rayleigh envelope over its mean: std = sqrt(4/pi - 1) ~ 0.523
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let frames: Vec<Vec<Complex64>> = (0..100)
            .map(|_| {
                let h = complex_gaussian(&mut r);
                vec![h; 8]
            })
            .collect();
        let refs: Vec<&[Complex64]> = frames.iter().map(|f| f.as_slice()).collect();
        let obs = envelope_observable(&refs).unwrap();
        assert_eq!(obs.len(), 800);
        let m = obs.iter().sum::<f64>() / 800.0;
        let sd = (obs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 800.0).sqrt();
        assert!(sd > 0.3, "{sd}");
    }

    #[test]
    fn single_sample_histogram() {
        let h = empirical_histogram(&[1.01], HistogramLayout::default(), 1e-9).unwrap();
        let big = h.probabilities.iter().filter(|&&p| p > 0.99).count();
        assert_eq!(big, 1);
        assert!(h.probabilities.iter().all(|&p| p >= 1e-9));
        assert!((h.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(h.bin_edges().len(), 33);
        assert_eq!(
            empirical_histogram(&[], HistogramLayout::default(), 1e-9),
            Err(DetectionError::EmptyInput)
        );
    }

    #[test]
    fn values_beyond_range_go_to_last_bin() {
        let h = empirical_histogram(&[4.0, 17.0], HistogramLayout::default(), 1e-9).unwrap();
        assert!(h.probabilities[31] > 0.99);
    }

    #[test]
    fn uniform_histogram_concentrates() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| r.random_range(0.0..4.0)).collect();
        let h = empirical_histogram(&samples, HistogramLayout::default(), 1e-9).unwrap();
        let p = 1.0 / 32.0;
        let bound = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        for q in &h.probabilities {
            assert!((q - p).abs() < bound, "{q}");
        }
    }

    #[test]
    fn kl_two_bin_value() {
        let layout = HistogramLayout { bins: 2, max: 4.0 };
        let p = Histogram::from_probabilities(layout, vec![0.5, 0.5]).unwrap();
        let q = Histogram::from_probabilities(layout, vec![0.25, 0.75]).unwrap();
        let expected = 0.5 * (2.0f64).ln() + 0.5 * (0.5f64 / 0.75).ln();
        let kl = kl_divergence(&p, &q).unwrap();
        assert!((kl - expected).abs() < 1e-15);
        assert!((kl - 0.1438).abs() < 1e-4);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let other =
            Histogram::from_probabilities(HistogramLayout { bins: 2, max: 2.0 }, vec![0.5, 0.5])
                .unwrap();
        assert_eq!(
            kl_divergence(&p, &other),
            Err(DetectionError::LayoutMismatch)
        );
    }

    #[test]
    fn rates() {
        assert_eq!(
            detection_rates(&[true; 4], &[false; 4]).unwrap(),
            (1.0, 0.0)
        );
        assert_eq!(flag_rate(&[true, false, true, false]).unwrap(), 0.5);
        assert_eq!(detection_rates(&[], &[false]), Err(DetectionError::NoFlags));
        assert_eq!(calibrate_threshold(&[0.1, 0.3, 0.2]).unwrap(), 0.3);
        assert!(calibrate_threshold(&[]).is_err());
    }

    fn constant_window(n: usize, scale: f64) -> Vec<Vec<AnchorObservation>> {
        let layout = FrameLayout::default();
        (0..n)
            .map(|_| {
                (0..6)
                    .map(|_| AnchorObservation {
                        layout,
                        samples: vec![Complex64::new(scale, 0.0); 40],
                    })
                    .collect()
            })
            .collect()
    }

    fn rayleigh_window(n: usize, r: &mut ChaCha8Rng) -> Vec<Vec<AnchorObservation>> {
        let layout = FrameLayout::default();
        (0..n)
            .map(|_| {
                (0..6)
                    .map(|_| {
                        let h = complex_gaussian(r);
                        AnchorObservation {
                            layout,
                            samples: vec![h; 40],
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_baseline_vs_rayleigh() {
        let cfg = DetectorConfig::default();
        let det = calibrate_baseline(&constant_window(1000, 1e-3), &cfg).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let (kl, flag) = kl_detect(&det, &rayleigh_window(100, &mut r)).unwrap();
        assert!(kl > 0.05);
        assert!(flag);
        assert!(matches!(
            kl_detect(&det, &rayleigh_window(99, &mut r)),
            Err(DetectionError::WindowSize { .. })
        ));
    }

    #[test]
    fn baseline_needs_frames() {
        let cfg = DetectorConfig::default();
        assert!(matches!(
            calibrate_baseline(&[], &cfg),
            Err(DetectionError::InsufficientFrames { .. })
        ));
        assert!(calibrate_baseline(&constant_window(999, 1.0), &cfg).is_err());
    }

    #[test]
    fn self_consistent_baseline() {
        let cfg = DetectorConfig::default();
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let mut det = calibrate_baseline(&rayleigh_window(5000, &mut r), &cfg).unwrap();
        let cal: Vec<f64> = (0..200)
            .map(|_| window_kl(&det, &rayleigh_window(100, &mut r)).unwrap())
            .collect();
        det.threshold = calibrate_threshold(&cal).unwrap();
        let flags: Vec<bool> = (0..200)
            .map(|_| kl_detect(&det, &rayleigh_window(100, &mut r)).unwrap().1)
            .collect();
        assert!(flag_rate(&flags).unwrap() <= 0.01);
    }

    fn hist(layout: HistogramLayout) -> impl Strategy<Value = Histogram> {
        prop::collection::vec(0.0f64..1.0, layout.bins).prop_filter_map("degenerate", move |w| {
            let s: f64 = w.iter().sum();
            if s <= 0.0 {
                return None;
            }
            let floor = 1e-9;
            let mass = floor * layout.bins as f64;
            let p = w.iter().map(|x| floor + (1.0 - mass) * x / s).collect();
            Some(Histogram {
                layout,
                probabilities: p,
                smoothing_floor: floor,
            })
        })
    }

    proptest! {
        #[test]
        fn kl_nonnegative(p in hist(HistogramLayout::default()), q in hist(HistogramLayout::default())) {
            prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-12);
            prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        }

        #[test]
        fn histogram_normalized(samples in prop::collection::vec(-1.0f64..10.0, 1..500)) {
            let h = empirical_histogram(&samples, HistogramLayout::default(), 1e-9).unwrap();
            prop_assert!((h.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(h.probabilities.iter().all(|&p| p >= 1e-9));
        }

        #[test]
        fn observable_scale_invariant(seed in any::<u64>(), scale in 1e-6f64..1e6) {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let w = rayleigh_window(20, &mut r);
            let scaled: Vec<Vec<AnchorObservation>> = w.iter().map(|f| f.iter().map(|o| AnchorObservation {
                layout: o.layout,
                samples: o.samples.iter().map(|s| s * scale).collect(),
            }).collect()).collect();
            let a = pooled_envelope_observable(&w).unwrap();
            let b = pooled_envelope_observable(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            let mean = a.iter().sum::<f64>() / a.len() as f64;
            prop_assert!((mean - 1.0).abs() < 1e-9);
        }
    }
}
