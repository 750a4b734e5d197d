//! Radio link model: log-distance path loss, lognormal shadowing, block
//! Rayleigh fading and AWGN, plus the two-hop amplify-and-forward cascade.
//!
//! Sample amplitudes are in sqrt(mW): a unit-magnitude sample carries 0 dBm.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Deserialize;

/// Lowest power reported for an all-zero signal.
pub const POWER_FLOOR_DBM: f64 = -200.0;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    None,
    RayleighFlat,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    pub reference_loss_db: f64,
    pub shadowing_sigma_db: f64,
    pub fading: Fading,
    pub noise_power_dbm: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Falls back to `reference_distance_m` when unset.
    pub min_distance_m: Option<f64>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            path_loss_exponent: 2.7,
            reference_distance_m: 1.0,
            reference_loss_db: 40.2,
            shadowing_sigma_db: 4.0,
            fading: Fading::RayleighFlat,
            noise_power_dbm: -90.0,
            carrier_hz: 2.45e9,
            bandwidth_hz: 1e6,
            min_distance_m: None,
        }
    }
}

impl ChannelParams {
    pub fn min_distance(&self) -> f64 {
        self.min_distance_m.unwrap_or(self.reference_distance_m)
    }

    pub fn noise_power_mw(&self) -> f64 {
        dbm_to_mw(self.noise_power_dbm)
    }

    /// Deterministic, noise-free, fading-free settings used by exactness checks.
    pub fn ideal() -> Self {
        Self {
            shadowing_sigma_db: 0.0,
            fading: Fading::None,
            noise_power_dbm: f64::NEG_INFINITY,
            ..Self::default()
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    if mw > 0.0 {
        (10.0 * mw.log10()).max(POWER_FLOOR_DBM)
    } else {
        POWER_FLOOR_DBM
    }
}

/// Mean of `|s|^2` over the slice, in mW. Zero for an empty slice.
pub fn mean_power_mw(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Free-space loss `20 log10(4 pi d f / c)`.
pub fn friis_loss_db(distance_m: f64, carrier_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * distance_m * carrier_hz / SPEED_OF_LIGHT).log10()
}

pub fn path_loss_db(distance_m: f64, params: &ChannelParams) -> f64 {
    let d = distance_m.max(params.min_distance());
    params.reference_loss_db
        + 10.0 * params.path_loss_exponent * (d / params.reference_distance_m).log10()
}

pub fn shadowing_sample<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> f64 {
    if params.shadowing_sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, params.shadowing_sigma_db)
        .expect("sigma validated non-negative")
        .sample(rng)
}

/// Circularly symmetric complex Gaussian with `E|h|^2 = 1`, or exactly one
/// when fading is disabled.
pub fn fading_coefficient<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> Complex64 {
    match params.fading {
        Fading::None => Complex64::new(1.0, 0.0),
        Fading::RayleighFlat => complex_gaussian(rng),
    }
}

/// One CN(0, 1) draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn add_awgn<R: Rng + ?Sized>(samples: &mut [Complex64], noise_power_mw: f64, rng: &mut R) {
    if noise_power_mw <= 0.0 {
        return;
    }
    let scale = noise_power_mw.sqrt();
    for s in samples.iter_mut() {
        *s += complex_gaussian(rng) * scale;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRealization {
    pub received_symbols: Vec<Complex64>,
    pub fading_coefficient: Complex64,
    pub shadowing_db: f64,
    /// Mean received power over fading: tx - PL + shadowing.
    pub rx_power_dbm: f64,
}

/// Path loss, the given shadowing and one fresh fading draw; no noise.
pub fn propagate<R: Rng + ?Sized>(
    symbols: &[Complex64],
    tx_power_dbm: f64,
    distance_m: f64,
    shadowing_db: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> LinkRealization {
    let h = fading_coefficient(params, rng);
    let rx_power_dbm = tx_power_dbm - path_loss_db(distance_m, params) + shadowing_db;
    let gain = dbm_to_mw(rx_power_dbm).sqrt() * h;
    LinkRealization {
        received_symbols: symbols.iter().map(|s| s * gain).collect(),
        fading_coefficient: h,
        shadowing_db,
        rx_power_dbm,
    }
}

/// Single link with one shadowing draw, one fading draw and receiver noise.
pub fn apply_link<R: Rng + ?Sized>(
    symbols: &[Complex64],
    tx_power_dbm: f64,
    distance_m: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> LinkRealization {
    let shadowing_db = shadowing_sample(params, rng);
    apply_link_with_shadowing(symbols, tx_power_dbm, distance_m, shadowing_db, params, rng)
}

/// As [`apply_link`] but with the large-scale shadowing held by the caller.
pub fn apply_link_with_shadowing<R: Rng + ?Sized>(
    symbols: &[Complex64],
    tx_power_dbm: f64,
    distance_m: f64,
    shadowing_db: f64,
    params: &ChannelParams,
    rng: &mut R,
) -> LinkRealization {
    let mut link = propagate(symbols, tx_power_dbm, distance_m, shadowing_db, params, rng);
    add_awgn(&mut link.received_symbols, params.noise_power_mw(), rng);
    link
}

/// Amplification rule of an amplify-and-forward relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfGainPolicy {
    /// Fixed gain chosen so the relay's output averages to its rated power.
    /// The gain follows the mean input power, not the instantaneous one, so
    /// the first hop's fading survives in the forwarded signal.
    #[default]
    FixedOutputPower,
}

/// Rescales the relay's received samples to unit mean power; the caller then
/// applies the relay's transmit power on the second hop.
pub fn af_forward(
    leg1: &LinkRealization,
    policy: AfGainPolicy,
    params: &ChannelParams,
) -> Vec<Complex64> {
    match policy {
        AfGainPolicy::FixedOutputPower => {
            let mean_in = dbm_to_mw(leg1.rx_power_dbm) + params.noise_power_mw();
            let g = if mean_in > 0.0 {
                mean_in.sqrt().recip()
            } else {
                0.0
            };
            leg1.received_symbols.iter().map(|s| s * g).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub power_dbm: f64,
    pub distance_m: f64,
}

/// Source -> relay -> destination with independent fading on each hop and
/// noise injected at both receivers.
pub fn cascade_links<R: Rng + ?Sized>(
    symbols: &[Complex64],
    leg1: Leg,
    policy: AfGainPolicy,
    leg2: Leg,
    params: &ChannelParams,
    rng: &mut R,
) -> LinkRealization {
    let first = apply_link(symbols, leg1.power_dbm, leg1.distance_m, params, rng);
    let forwarded = af_forward(&first, policy, params);
    let second = apply_link(&forwarded, leg2.power_dbm, leg2.distance_m, params, rng);
    LinkRealization {
        received_symbols: second.received_symbols,
        fading_coefficient: first.fading_coefficient * second.fading_coefficient,
        shadowing_db: first.shadowing_db + second.shadowing_db,
        rx_power_dbm: second.rx_power_dbm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn path_loss_reference_and_decade() {
        let p = ChannelParams::default();
        assert!((path_loss_db(1.0, &p) - 40.2).abs() < 1e-12);
        let p2 = ChannelParams {
            path_loss_exponent: 2.0,
            ..p.clone()
        };
        assert!((path_loss_db(10.0, &p2) - 60.2).abs() < 1e-12);
        // clamp below the minimum distance
        assert_eq!(path_loss_db(0.0, &p), path_loss_db(1.0, &p));
    }

    #[test]
    fn reference_loss_matches_free_space() {
        let p = ChannelParams::default();
        let friis = friis_loss_db(p.reference_distance_m, p.carrier_hz);
        assert!((friis - p.reference_loss_db).abs() < 0.1, "friis {friis}");
    }

    #[test]
    fn shadowing_moments() {
        let mut r = rng(1);
        let zero = ChannelParams {
            shadowing_sigma_db: 0.0,
            ..Default::default()
        };
        assert_eq!(shadowing_sample(&zero, &mut r), 0.0);
        let p = ChannelParams::default();
        let xs: Vec<f64> = (0..100_000).map(|_| shadowing_sample(&p, &mut r)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd =
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((sd - 4.0).abs() < 0.1, "sd {sd}");
    }

    #[test]
    fn fading_moments_and_median() {
        let mut r = rng(2);
        assert_eq!(
            fading_coefficient(&ChannelParams::ideal(), &mut r),
            Complex64::new(1.0, 0.0)
        );
        let p = ChannelParams::default();
        let mut env: Vec<f64> = (0..100_000)
            .map(|_| fading_coefficient(&p, &mut r).norm())
            .collect();
        let power = env.iter().map(|a| a * a).sum::<f64>() / env.len() as f64;
        assert!((power - 1.0).abs() < 0.02, "power {power}");
        env.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = env[env.len() / 2];
        // Rayleigh(sigma = 1/sqrt 2) median: sigma * sqrt(2 ln 2)
        let oracle = std::f64::consts::FRAC_1_SQRT_2 * (2.0 * 2f64.ln()).sqrt();
        assert!((oracle - 0.8326).abs() < 1e-4);
        assert!((median - oracle).abs() < 0.01, "median {median}");
    }

    #[test]
    fn pure_gain_link() {
        let p = ChannelParams::ideal();
        let syms = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        let link = apply_link(&syms, 10.0, 5.0, &p, &mut rng(3));
        let scale = 10f64.powf((10.0 - path_loss_db(5.0, &p)) / 20.0);
        for (a, b) in link.received_symbols.iter().zip(&syms) {
            assert!((a - b * scale).norm() < 1e-15);
        }
        assert!(apply_link(&[], 10.0, 5.0, &p, &mut rng(3))
            .received_symbols
            .is_empty());
    }

    #[test]
    fn mean_power_over_fading() {
        let p = ChannelParams {
            shadowing_sigma_db: 0.0,
            noise_power_dbm: f64::NEG_INFINITY,
            ..Default::default()
        };
        let syms = vec![Complex64::new(1.0, 0.0); 8];
        let mut r = rng(4);
        let total: f64 = (0..10_000)
            .map(|_| mean_power_mw(&apply_link(&syms, 0.0, 3.0, &p, &mut r).received_symbols))
            .sum();
        let measured = mw_to_dbm(total / 10_000.0);
        let expected = -path_loss_db(3.0, &p);
        assert!(
            (measured - expected).abs() < 0.2,
            "{measured} vs {expected}"
        );
    }

    #[test]
    fn deterministic_cascade_gain() {
        let p = ChannelParams::ideal();
        let syms = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let out = cascade_links(
            &syms,
            Leg {
                power_dbm: 0.0,
                distance_m: 3.0,
            },
            AfGainPolicy::FixedOutputPower,
            Leg {
                power_dbm: 20.0,
                distance_m: 4.0,
            },
            &p,
            &mut rng(5),
        );
        let g1 = dbm_to_mw(-path_loss_db(3.0, &p)).sqrt();
        let af = 1.0 / g1;
        let g2 = dbm_to_mw(20.0 - path_loss_db(4.0, &p)).sqrt();
        for (o, s) in out.received_symbols.iter().zip(&syms) {
            assert!((o - s * (g1 * af * g2)).norm() < 1e-12);
        }
    }

    fn excess_kurtosis(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        m4 / (m2 * m2) - 3.0
    }

    #[test]
    fn double_rayleigh_is_heavier_tailed() {
        let p = ChannelParams::default();
        let mut r = rng(6);
        let single: Vec<f64> = (0..100_000)
            .map(|_| fading_coefficient(&p, &mut r).norm())
            .collect();
        let double: Vec<f64> = (0..100_000)
            .map(|_| (fading_coefficient(&p, &mut r) * fading_coefficient(&p, &mut r)).norm())
            .collect();
        let (ks, kd) = (excess_kurtosis(&single), excess_kurtosis(&double));
        assert!(kd - ks > 0.5, "single {ks} double {kd}");
    }

    #[test]
    fn cascade_snr_below_both_hops() {
        // Fading and shadowing off; noise on both hops.
        let p = ChannelParams {
            shadowing_sigma_db: 0.0,
            fading: Fading::None,
            ..Default::default()
        };
        let leg1 = Leg {
            power_dbm: -20.0,
            distance_m: 10.0,
        };
        let leg2 = Leg {
            power_dbm: -15.0,
            distance_m: 10.0,
        };
        let noise = p.noise_power_mw();
        let g1 = dbm_to_mw(leg1.power_dbm - path_loss_db(leg1.distance_m, &p)) / noise;
        let g2 = dbm_to_mw(leg2.power_dbm - path_loss_db(leg2.distance_m, &p)) / noise;
        let oracle = g1 * g2 / (g1 + g2 + 1.0);

        let syms = vec![Complex64::new(1.0, 0.0); 100_000];
        let out = cascade_links(
            &syms,
            leg1,
            AfGainPolicy::FixedOutputPower,
            leg2,
            &p,
            &mut rng(7),
        );
        let signal_amp = out.received_symbols.iter().map(|s| s.re).sum::<f64>() / syms.len() as f64;
        let noise_var = out
            .received_symbols
            .iter()
            .map(|s| (s - signal_amp).norm_sqr())
            .sum::<f64>()
            / syms.len() as f64;
        let snr = signal_amp * signal_amp / noise_var;
        assert!(snr <= g1.min(g2), "snr {snr} legs {g1} {g2}");
        assert!(
            (snr / oracle - 1.0).abs() < 0.05,
            "snr {snr} oracle {oracle}"
        );
    }

    #[test]
    fn same_seed_same_link() {
        let p = ChannelParams::default();
        let syms = vec![Complex64::new(1.0, 0.0); 40];
        let a = apply_link(&syms, 0.0, 4.0, &p, &mut rng(8));
        let b = apply_link(&syms, 0.0, 4.0, &p, &mut rng(8));
        assert_eq!(a, b);
    }

    #[test]
    fn power_floor() {
        assert_eq!(mw_to_dbm(0.0), POWER_FLOOR_DBM);
        assert!((mw_to_dbm(1.0)).abs() < 1e-12);
    }
}
