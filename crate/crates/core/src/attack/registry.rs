use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::RngCore;

use super::{AttackError, CaseId, SyncMode};
use crate::channel::{AfGainPolicy, ChannelParams};
use crate::deployment::Position2D;
use crate::frame::ModulatedFrame;

/// What a strategy may look at when building its waveform.
#[derive(Debug, Clone, Copy)]
pub struct AttackContext<'a> {
    pub frame: &'a ModulatedFrame,
    pub target_pos: Position2D,
    pub target_power_dbm: f64,
    pub attacker_pos: Position2D,
    pub channel: &'a ChannelParams,
    pub target_to_attacker_shadowing_db: f64,
    pub af_gain_policy: AfGainPolicy,
}

pub trait AttackStrategy: Send + Sync + fmt::Debug {
    fn case(&self) -> CaseId;

    fn name(&self) -> &'static str {
        self.case().name()
    }

    fn sync(&self) -> SyncMode {
        self.case().sync()
    }

    /// Samples the attacker radiates, aligned to the legitimate frame and at
    /// unit mean power over the slots it transmits in. `None` when silent.
    fn waveform(&self, ctx: &AttackContext<'_>, rng: &mut dyn RngCore) -> Option<Vec<Complex64>>;
}

/// Strategies keyed by case name.
#[derive(Debug, Default, Clone)]
pub struct AttackRegistry {
    strategies: BTreeMap<&'static str, Arc<dyn AttackStrategy>>,
}

impl AttackRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(super::NoAttack));
        r.register(Arc::new(super::Jamming));
        r.register(Arc::new(super::Spoofing));
        r.register(Arc::new(super::BeaconSync));
        r.register(Arc::new(super::RelayAf));
        r
    }

    /// Replaces any strategy already registered under the same name.
    pub fn register(&mut self, strategy: Arc<dyn AttackStrategy>) {
        self.strategies.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn AttackStrategy>, AttackError> {
        self.strategies
            .get(name)
            .cloned()
            .ok_or_else(|| AttackError::UnknownCase(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.strategies.keys().copied()
    }
}
