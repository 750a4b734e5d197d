//! Quick executable checks of the model against closed-form results.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::attack::{
    attacker_contribution, observe_at_anchors, AttackRegistry, AttackScenario, CaseId,
    LinkShadowing, Transmission,
};
use crate::channel::{add_awgn, path_loss_db, ChannelParams, Fading};
use crate::config::parse_config;
use crate::deployment::{Deployment, Position2D};
use crate::detection::{
    empirical_histogram, kl_divergence, power_gap_detect, ComponentStats, Histogram,
    HistogramLayout,
};
use crate::frame::{
    bit_errors, bpsk_demodulate, bpsk_modulate, qam16_modulate, random_frame, BitVector,
    FrameLayout,
};
use crate::localization::{beacon_rss, expected_fingerprints, grid_search_localize, trilaterate};
use crate::receiver::decode_header;

type Check = fn() -> Result<(), String>;

pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Q(x), the standard normal tail probability.
pub fn q_function(x: f64) -> f64 {
    Normal::standard().sf(x)
}

/// Simulated BPSK BER over AWGN at the given Eb/N0.
pub fn bpsk_awgn_ber(ebn0_db: f64, n_bits: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let bits = BitVector::random(n_bits, &mut r);
    let mut symbols = bpsk_modulate(&bits);
    // unit-energy symbols, one bit each: N0 = 1 / (Eb/N0)
    add_awgn(&mut symbols, 10f64.powf(-ebn0_db / 10.0), &mut r);
    let rx = bpsk_demodulate(&symbols);
    bit_errors(&bits, &rx).expect("same length") as f64 / n_bits as f64
}

fn bpsk_mapping() -> Result<(), String> {
    let s = bpsk_modulate(&BitVector::new(vec![0, 1]).map_err(|e| e.to_string())?);
    ensure(
        s == [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        || format!("{s:?}"),
    )
}

fn qam_rejects_odd_lengths() -> Result<(), String> {
    ensure(qam16_modulate(&BitVector::zeros(6)).is_err(), || {
        "accepted 6 bits".into()
    })
}

fn qam_gray_corner() -> Result<(), String> {
    let s = qam16_modulate(&BitVector::new(vec![0, 0, 0, 0]).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let expected = Complex64::new(-3.0, -3.0) / 10f64.sqrt();
    ensure((s[0] - expected).norm() < 1e-12, || format!("{:?}", s[0]))
}

fn bpsk_awgn_oracle() -> Result<(), String> {
    let expected = q_function((2.0 * 10f64.powf(0.4)).sqrt());
    let ber = bpsk_awgn_ber(4.0, 1_000_000, 7);
    ensure((ber / expected - 1.0).abs() < 0.05, || {
        format!("BER {ber} vs {expected}")
    })
}

fn reference_path_loss() -> Result<(), String> {
    let pl = path_loss_db(1.0, &ChannelParams::default());
    ensure((pl - 40.2).abs() < 0.1, || format!("{pl}"))
}

fn exact_localization() -> Result<(), String> {
    let ch = ChannelParams {
        shadowing_sigma_db: 0.0,
        fading: Fading::None,
        ..Default::default()
    };
    let dep = Deployment::hex(5.0).map_err(|e| e.to_string())?;
    let registry = AttackRegistry::builtin();
    let none = registry.get("none").map_err(|e| e.to_string())?;
    let scenario = AttackScenario::new(CaseId::NoAttack, 20.0, dep.attacker_pos);
    let layout = FrameLayout::default();
    let mut r = rng(8);
    for p in [-5.0, 0.0, 5.0, 10.0] {
        let map = expected_fingerprints(&dep, &ch, p);
        for cell in 0..6 {
            let d = dep.clone().with_target(cell).map_err(|e| e.to_string())?;
            let frame = random_frame(&layout, &mut r);
            let tx = Transmission {
                deployment: &d,
                frame: &frame,
                scenario: &scenario,
                channel: &ch,
                target_power_dbm: p,
            };
            let obs = observe_at_anchors(&tx, none.as_ref(), &mut r);
            let beacons: Vec<_> = obs.iter().map(|o| o.beacon()).collect();
            let rss = beacon_rss(&beacons).map_err(|e| e.to_string())?;
            let est = grid_search_localize(&rss, &map)
                .map_err(|e| e.to_string())?
                .cell_index;
            ensure(est == cell, || {
                format!("cell {cell} at {p} dBm localized to {est}")
            })?;
        }
    }
    Ok(())
}

fn kl_values() -> Result<(), String> {
    let layout = HistogramLayout { bins: 2, max: 4.0 };
    let p = Histogram::from_probabilities(layout, vec![0.5, 0.5]).map_err(|e| e.to_string())?;
    let q = Histogram::from_probabilities(layout, vec![0.25, 0.75]).map_err(|e| e.to_string())?;
    let kl = kl_divergence(&p, &q).map_err(|e| e.to_string())?;
    ensure((kl - 0.1438).abs() < 1e-4, || format!("KL {kl}"))?;
    let pp = kl_divergence(&p, &p).map_err(|e| e.to_string())?;
    ensure(pp == 0.0, || format!("KL(P,P) {pp}"))
}

fn histogram_normalized() -> Result<(), String> {
    let h = empirical_histogram(&[0.1, 0.5, 2.2, 9.0], HistogramLayout::default(), 1e-9)
        .map_err(|e| e.to_string())?;
    let s: f64 = h.probabilities.iter().sum();
    ensure((s - 1.0).abs() < 1e-12, || format!("sum {s}"))
}

fn gap_boundary() -> Result<(), String> {
    let at = |gap: f64| ComponentStats {
        beacon_power_dbm: -50.0 + gap,
        header_power_dbm: -50.0,
        payload_power_dbm: -50.0,
        header_ber: 0.0,
    };
    ensure(!power_gap_detect(&at(0.0), 3.0), || "flagged 0 dB".into())?;
    ensure(power_gap_detect(&at(10.0), 3.0), || "missed 10 dB".into())?;
    ensure(!power_gap_detect(&at(3.0), 3.0), || {
        "flagged exactly 3 dB".into()
    })
}

fn trilateration_exact() -> Result<(), String> {
    let dep = Deployment::hex(5.0).map_err(|e| e.to_string())?;
    let truth = Position2D::new(1.3, -2.1);
    let ranges: Vec<f64> = dep
        .anchors
        .iter()
        .map(|a| crate::deployment::distance(*a, truth))
        .collect();
    let est = trilaterate(&dep.anchors, &ranges).map_err(|e| e.to_string())?;
    let err = crate::deployment::distance(est, truth);
    ensure(err < 1e-6, || format!("error {err} m"))
}

fn beacon_sync_confined() -> Result<(), String> {
    let dep = Deployment::hex(5.0).map_err(|e| e.to_string())?;
    let ch = ChannelParams::default();
    let frame = random_frame(&FrameLayout::default(), &mut rng(9));
    let scenario = AttackScenario::new(CaseId::BeaconSync, 20.0, dep.attacker_pos);
    let tx = Transmission {
        deployment: &dep,
        frame: &frame,
        scenario: &scenario,
        channel: &ch,
        target_power_dbm: 0.0,
    };
    let strategy = AttackRegistry::builtin()
        .get("beacon_sync")
        .map_err(|e| e.to_string())?;
    let part = attacker_contribution(&tx, strategy.as_ref(), &LinkShadowing::zero(), &mut rng(10));
    ensure(
        part.iter().all(|a| {
            a[8..].iter().all(|s| s.norm() == 0.0) && a[..8].iter().any(|s| s.norm() > 0.0)
        }),
        || "energy outside beacon slots".into(),
    )
}

fn clean_header() -> Result<(), String> {
    let dep = Deployment::hex(5.0).map_err(|e| e.to_string())?;
    let ch = ChannelParams {
        shadowing_sigma_db: 0.0,
        fading: Fading::None,
        ..Default::default()
    };
    let frame = random_frame(&FrameLayout::default(), &mut rng(11));
    let scenario = AttackScenario::new(CaseId::NoAttack, 20.0, dep.attacker_pos);
    let tx = Transmission {
        deployment: &dep,
        frame: &frame,
        scenario: &scenario,
        channel: &ch,
        target_power_dbm: 10.0,
    };
    let none = AttackRegistry::builtin()
        .get("none")
        .map_err(|e| e.to_string())?;
    let obs = observe_at_anchors(&tx, none.as_ref(), &mut rng(12));
    ensure(
        obs.iter()
            .all(|o| decode_header(o, &frame.layout) == frame.tx_bits.header),
        || "header errors on a clean link".into(),
    )
}

fn config_defaults_and_errors() -> Result<(), String> {
    let cfg = parse_config("").map_err(|e| e.to_string())?;
    ensure(
        cfg.experiment.target_powers_dbm == [-5.0, 0.0, 5.0, 10.0],
        || "default powers".into(),
    )?;
    let err = parse_config("[channel]\npath_loss_exponent = -1").err();
    ensure(
        err.as_ref().and_then(|e| e.key()) == Some("path_loss_exponent"),
        || format!("{err:?}"),
    )?;
    ensure(parse_config("foo = 1").is_err(), || {
        "unknown key accepted".into()
    })
}

pub fn run_all() -> Vec<CheckResult> {
    let checks: [(&'static str, Check); 13] = [
        ("bpsk_mapping", bpsk_mapping),
        ("qam16_rejects_odd_lengths", qam_rejects_odd_lengths),
        ("qam16_gray_corner", qam_gray_corner),
        ("bpsk_awgn_ber_oracle", bpsk_awgn_oracle),
        ("reference_path_loss", reference_path_loss),
        ("exact_localization", exact_localization),
        ("kl_values", kl_values),
        ("histogram_normalized", histogram_normalized),
        ("power_gap_boundary", gap_boundary),
        ("trilateration_exact", trilateration_exact),
        ("beacon_sync_confined", beacon_sync_confined),
        ("clean_header", clean_header),
        ("config_defaults_and_errors", config_defaults_and_errors),
    ];
    checks
        .into_iter()
        .map(|(name, f)| CheckResult { name, outcome: f() })
        .collect()
}
