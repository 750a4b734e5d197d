//! Attack scenarios and the superposition of legitimate and attacker signals
//! at the anchors.
//!
//! Each transmission case is an [`AttackStrategy`] registered by name in an
//! [`AttackRegistry`]; the experiment runner picks strategies by the names in
//! its configuration.

mod registry;
mod strategies;

pub use registry::{AttackContext, AttackRegistry, AttackStrategy};
pub use strategies::{BeaconSync, Jamming, NoAttack, RelayAf, Spoofing};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::{add_awgn, propagate, shadowing_sample, AfGainPolicy, ChannelParams};
use crate::deployment::{distance, Deployment, Position2D, N_CELLS};
use crate::frame::{FrameLayout, ModulatedFrame};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("unknown attack case `{0}` (expected one of none, jam, spoof, beacon_sync, relay_af)")]
    UnknownCase(String),
    #[error("sync mode {sync:?} is invalid for case {case}")]
    SyncMismatch { case: CaseId, sync: SyncMode },
}

/// The five transmission cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    NoAttack,
    Jamming,
    Spoofing,
    BeaconSync,
    RelayAf,
}

impl CaseId {
    pub const ALL: [CaseId; 5] = [
        CaseId::NoAttack,
        CaseId::Jamming,
        CaseId::Spoofing,
        CaseId::BeaconSync,
        CaseId::RelayAf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::NoAttack => "none",
            CaseId::Jamming => "jam",
            CaseId::Spoofing => "spoof",
            CaseId::BeaconSync => "beacon_sync",
            CaseId::RelayAf => "relay_af",
        }
    }

    pub fn sync(self) -> SyncMode {
        match self {
            CaseId::BeaconSync => SyncMode::BeaconOnly,
            _ => SyncMode::FullFrame,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| AttackError::UnknownCase(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncMode {
    FullFrame,
    BeaconOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackScenario {
    pub case: CaseId,
    pub attacker_power_dbm: f64,
    pub attacker_pos: Position2D,
    pub af_gain_policy: AfGainPolicy,
    pub sync: SyncMode,
}

impl AttackScenario {
    pub fn new(case: CaseId, attacker_power_dbm: f64, attacker_pos: Position2D) -> Self {
        Self {
            case,
            attacker_power_dbm,
            attacker_pos,
            af_gain_policy: AfGainPolicy::FixedOutputPower,
            sync: case.sync(),
        }
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        if self.sync != self.case.sync() {
            return Err(AttackError::SyncMismatch {
                case: self.case,
                sync: self.sync,
            });
        }
        Ok(())
    }
}

/// Received samples of one frame at one anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorObservation {
    pub layout: FrameLayout,
    pub samples: Vec<Complex64>,
}

impl AnchorObservation {
    pub fn beacon(&self) -> &[Complex64] {
        &self.samples[self.layout.ranges()[0].clone()]
    }

    pub fn header(&self) -> &[Complex64] {
        &self.samples[self.layout.ranges()[1].clone()]
    }

    pub fn payload(&self) -> &[Complex64] {
        &self.samples[self.layout.ranges()[2].clone()]
    }
}

/// Large-scale shadowing of every link touched by one observation. Drawn per
/// frame for localization trials, held fixed across a detection window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkShadowing {
    pub target_to_anchor: [f64; N_CELLS],
    pub attacker_to_anchor: [f64; N_CELLS],
    pub target_to_attacker: f64,
}

impl LinkShadowing {
    pub fn draw<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> Self {
        Self {
            target_to_anchor: std::array::from_fn(|_| shadowing_sample(params, rng)),
            attacker_to_anchor: std::array::from_fn(|_| shadowing_sample(params, rng)),
            target_to_attacker: shadowing_sample(params, rng),
        }
    }

    pub fn zero() -> Self {
        Self {
            target_to_anchor: [0.0; N_CELLS],
            attacker_to_anchor: [0.0; N_CELLS],
            target_to_attacker: 0.0,
        }
    }
}

/// Independent random streams for the legitimate links, everything the
/// attacker does, and receiver noise. Keeping them apart makes an attacked
/// observation the exact sum of the clean one and the attacker's part.
#[derive(Debug, Clone)]
pub struct LinkStreams {
    pub legit: ChaCha8Rng,
    pub attack: ChaCha8Rng,
    pub noise: ChaCha8Rng,
}

impl LinkStreams {
    pub fn from_rng<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            legit: ChaCha8Rng::seed_from_u64(rng.random()),
            attack: ChaCha8Rng::seed_from_u64(rng.random()),
            noise: ChaCha8Rng::seed_from_u64(rng.random()),
        }
    }
}

/// Everything needed to generate one frame's observations.
#[derive(Debug, Clone, Copy)]
pub struct Transmission<'a> {
    pub deployment: &'a Deployment,
    pub frame: &'a ModulatedFrame,
    pub scenario: &'a AttackScenario,
    pub channel: &'a ChannelParams,
    pub target_power_dbm: f64,
}

impl Transmission<'_> {
    fn context(&self, shadowing: &LinkShadowing) -> AttackContext<'_> {
        AttackContext {
            frame: self.frame,
            target_pos: self.deployment.target_pos(),
            target_power_dbm: self.target_power_dbm,
            attacker_pos: self.scenario.attacker_pos,
            channel: self.channel,
            target_to_attacker_shadowing_db: shadowing.target_to_attacker,
            af_gain_policy: self.scenario.af_gain_policy,
        }
    }
}

/// What the attacker radiates for this frame, aligned to the frame and at
/// unit mean power; `None` when silent.
pub fn attacker_waveform(
    strategy: &dyn AttackStrategy,
    ctx: &AttackContext<'_>,
    rng: &mut dyn RngCore,
) -> Option<Vec<Complex64>> {
    strategy.waveform(ctx, rng)
}

/// The attacker's noise-free contribution at each anchor.
pub fn attacker_contribution(
    tx: &Transmission<'_>,
    strategy: &dyn AttackStrategy,
    shadowing: &LinkShadowing,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Complex64>> {
    let n = tx.frame.layout.total_symbols();
    let ctx = tx.context(shadowing);
    match attacker_waveform(strategy, &ctx, rng) {
        None => vec![vec![Complex64::new(0.0, 0.0); n]; N_CELLS],
        Some(wave) => tx
            .deployment
            .anchors
            .iter()
            .enumerate()
            .map(|(j, &anchor)| {
                propagate(
                    &wave,
                    tx.scenario.attacker_power_dbm,
                    distance(tx.scenario.attacker_pos, anchor),
                    shadowing.attacker_to_anchor[j],
                    tx.channel,
                    rng,
                )
                .received_symbols
            })
            .collect(),
    }
}

/// Legitimate link plus attacker link plus receiver noise at every anchor,
/// with independent fading per link.
pub fn observe_at_anchors_with(
    tx: &Transmission<'_>,
    strategy: &dyn AttackStrategy,
    shadowing: &LinkShadowing,
    streams: &mut LinkStreams,
) -> Vec<AnchorObservation> {
    let symbols = tx.frame.symbols();
    let target = tx.deployment.target_pos();
    let legit: Vec<Vec<Complex64>> = tx
        .deployment
        .anchors
        .iter()
        .enumerate()
        .map(|(j, &anchor)| {
            propagate(
                &symbols,
                tx.target_power_dbm,
                distance(target, anchor),
                shadowing.target_to_anchor[j],
                tx.channel,
                &mut streams.legit,
            )
            .received_symbols
        })
        .collect();
    let attack = attacker_contribution(tx, strategy, shadowing, &mut streams.attack);
    let noise_mw = tx.channel.noise_power_mw();
    legit
        .into_iter()
        .zip(attack)
        .map(|(l, a)| {
            let mut samples: Vec<Complex64> = l.iter().zip(&a).map(|(x, y)| x + y).collect();
            add_awgn(&mut samples, noise_mw, &mut streams.noise);
            AnchorObservation {
                layout: tx.frame.layout,
                samples,
            }
        })
        .collect()
}

/// Convenience form drawing fresh shadowing and sub-streams from `rng`.
pub fn observe_at_anchors<R: Rng + ?Sized>(
    tx: &Transmission<'_>,
    strategy: &dyn AttackStrategy,
    rng: &mut R,
) -> Vec<AnchorObservation> {
    let shadowing = LinkShadowing::draw(tx.channel, rng);
    let mut streams = LinkStreams::from_rng(rng);
    observe_at_anchors_with(tx, strategy, &shadowing, &mut streams)
}
