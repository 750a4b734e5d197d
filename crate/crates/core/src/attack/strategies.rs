use num_complex::Complex64;
use rand::{Rng, RngCore};

use super::{AttackContext, AttackStrategy, CaseId};
use crate::channel::{af_forward, apply_link_with_shadowing, complex_gaussian};
use crate::deployment::distance;
use crate::frame::random_frame;

#[derive(Debug, Clone, Copy, Default)]
pub struct NoAttack;

impl AttackStrategy for NoAttack {
    fn case(&self) -> CaseId {
        CaseId::NoAttack
    }

    fn waveform(&self, _: &AttackContext<'_>, _: &mut dyn RngCore) -> Option<Vec<Complex64>> {
        None
    }
}

/// Unit-power complex Gaussian noise across the whole frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jamming;

impl AttackStrategy for Jamming {
    fn case(&self) -> CaseId {
        CaseId::Jamming
    }

    fn waveform(&self, ctx: &AttackContext<'_>, rng: &mut dyn RngCore) -> Option<Vec<Complex64>> {
        let n = ctx.frame.layout.total_symbols();
        Some((0..n).map(|_| complex_gaussian(rng)).collect())
    }
}

/// A forged frame with the public beacon and random header and payload,
/// sent with an unknown symbol offset relative to the legitimate one.
#[derive(Debug, Clone, Copy, Default)]
pub struct Spoofing;

impl AttackStrategy for Spoofing {
    fn case(&self) -> CaseId {
        CaseId::Spoofing
    }

    fn waveform(&self, ctx: &AttackContext<'_>, rng: &mut dyn RngCore) -> Option<Vec<Complex64>> {
        let mut forged = random_frame(&ctx.frame.layout, rng).symbols();
        let offset = rng.random_range(0..forged.len());
        forged.rotate_left(offset);
        Some(forged)
    }
}

/// Noise confined to the beacon slots, leaving header and payload untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct BeaconSync;

impl AttackStrategy for BeaconSync {
    fn case(&self) -> CaseId {
        CaseId::BeaconSync
    }

    fn waveform(&self, ctx: &AttackContext<'_>, rng: &mut dyn RngCore) -> Option<Vec<Complex64>> {
        let layout = ctx.frame.layout;
        let beacon = layout.beacon_symbols();
        let mut wave = vec![Complex64::new(0.0, 0.0); layout.total_symbols()];
        for s in &mut wave[..beacon] {
            *s = complex_gaussian(rng);
        }
        Some(wave)
    }
}

/// Amplify-and-forward relay: receives the target's frame over its own faded,
/// noisy link and re-radiates it, so each anchor sees a doubly faded copy.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelayAf;

impl AttackStrategy for RelayAf {
    fn case(&self) -> CaseId {
        CaseId::RelayAf
    }

    fn waveform(&self, ctx: &AttackContext<'_>, rng: &mut dyn RngCore) -> Option<Vec<Complex64>> {
        let leg1 = apply_link_with_shadowing(
            &ctx.frame.symbols(),
            ctx.target_power_dbm,
            distance(ctx.target_pos, ctx.attacker_pos),
            ctx.target_to_attacker_shadowing_db,
            ctx.channel,
            rng,
        );
        Some(af_forward(&leg1, ctx.af_gain_policy, ctx.channel))
    }
}
