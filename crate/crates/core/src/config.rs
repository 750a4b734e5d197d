//! TOML configuration with four flat sections: `[channel]`, `[deployment]`,
//! `[detector]` and `[experiment]`. Omitted keys take their defaults.

use serde::Deserialize;
use thiserror::Error;

use crate::attack::CaseId;
use crate::channel::ChannelParams;
use crate::deployment::{Deployment, Position2D};
use crate::detection::DetectorConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{}{message}", location(.line, .key))]
    Parse {
        key: Option<String>,
        line: Option<usize>,
        message: String,
    },
    #[error("{}{message}", location(.line, &Some(.key.clone())))]
    Constraint {
        key: String,
        line: Option<usize>,
        message: String,
    },
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

fn location(line: &Option<usize>, key: &Option<String>) -> String {
    let mut s = String::new();
    if let Some(l) = line {
        s.push_str(&format!("line {l}: "));
    }
    if let Some(k) = key {
        s.push_str(&format!("`{k}`: "));
    }
    s
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Parse { key, .. } => key.as_deref(),
            ConfigError::Constraint { key, .. } => Some(key),
            ConfigError::Io { .. } => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Parse { line, .. } | ConfigError::Constraint { line, .. } => *line,
            ConfigError::Io { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeploymentParams {
    pub ring_radius_m: f64,
    pub attacker_x_m: f64,
    pub attacker_y_m: f64,
}

impl Default for DeploymentParams {
    fn default() -> Self {
        Self {
            ring_radius_m: 5.0,
            attacker_x_m: 4.0,
            attacker_y_m: 0.0,
        }
    }
}

impl DeploymentParams {
    pub fn build(&self) -> Result<Deployment, ConfigError> {
        Deployment::hex(self.ring_radius_m)
            .and_then(|d| d.with_attacker(Position2D::new(self.attacker_x_m, self.attacker_y_m)))
            .map_err(|e| constraint("ring_radius_m", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub target_powers_dbm: Vec<f64>,
    pub attacker_power_dbm: f64,
    pub frames_per_point: usize,
    pub windows_per_point: usize,
    pub master_seed: u64,
    pub cases: Vec<String>,
    pub roc_thresholds: Vec<f64>,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            target_powers_dbm: vec![-5.0, 0.0, 5.0, 10.0],
            attacker_power_dbm: 20.0,
            frames_per_point: 2000,
            windows_per_point: 200,
            master_seed: 1,
            cases: CaseId::ALL.iter().map(|c| c.name().to_string()).collect(),
            roc_thresholds: default_roc_thresholds(),
        }
    }
}

/// 0 to 0.2 nats in 0.002 steps, which brackets 0.008.
fn default_roc_thresholds() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 0.002).collect()
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    pub deployment: DeploymentParams,
    pub detector: DetectorConfig,
    pub experiment: ExperimentParams,
}

fn constraint(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Constraint {
        key: key.to_string(),
        line: None,
        message: message.into(),
    }
}

fn check(ok: bool, key: &str, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(constraint(key, message))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.channel;
        check(
            c.path_loss_exponent > 0.0 && c.path_loss_exponent.is_finite(),
            "path_loss_exponent",
            "must be positive",
        )?;
        check(
            c.reference_distance_m > 0.0 && c.reference_distance_m.is_finite(),
            "reference_distance_m",
            "must be positive",
        )?;
        check(
            c.reference_loss_db.is_finite(),
            "reference_loss_db",
            "must be finite",
        )?;
        check(
            c.shadowing_sigma_db >= 0.0 && c.shadowing_sigma_db.is_finite(),
            "shadowing_sigma_db",
            "must be non-negative",
        )?;
        check(
            !c.noise_power_dbm.is_nan() && c.noise_power_dbm < f64::INFINITY,
            "noise_power_dbm",
            "must be finite or -inf",
        )?;
        check(
            c.carrier_hz > 0.0 && c.carrier_hz.is_finite(),
            "carrier_hz",
            "must be positive",
        )?;
        check(
            c.bandwidth_hz > 0.0 && c.bandwidth_hz.is_finite(),
            "bandwidth_hz",
            "must be positive",
        )?;
        if let Some(m) = c.min_distance_m {
            check(
                m > 0.0 && m.is_finite(),
                "min_distance_m",
                "must be positive",
            )?;
        }

        let d = &self.deployment;
        check(
            d.ring_radius_m > 0.0 && d.ring_radius_m.is_finite(),
            "ring_radius_m",
            "must be positive",
        )?;
        check(d.attacker_x_m.is_finite(), "attacker_x_m", "must be finite")?;
        check(d.attacker_y_m.is_finite(), "attacker_y_m", "must be finite")?;

        let t = &self.detector;
        check(t.bins >= 1, "bins", "must be at least 1")?;
        check(
            t.hist_max > 0.0 && t.hist_max.is_finite(),
            "hist_max",
            "must be positive",
        )?;
        check(
            t.smoothing_floor >= 0.0 && t.smoothing_floor * (t.bins as f64) < 1.0,
            "smoothing_floor",
            "must be non-negative and below 1/bins",
        )?;
        check(t.threshold >= 0.0, "threshold", "must be non-negative")?;
        check(t.window_frames >= 1, "window_frames", "must be at least 1")?;
        check(
            t.baseline_frames >= 10 * t.window_frames,
            "baseline_frames",
            "must be at least 10 windows",
        )?;
        check(
            t.calibration_windows >= 1,
            "calibration_windows",
            "must be at least 1",
        )?;
        check(
            t.gap_threshold_db.is_finite(),
            "gap_threshold_db",
            "must be finite",
        )?;
        check(
            t.min_header_snr_db.is_finite(),
            "min_header_snr_db",
            "must be finite",
        )?;

        let e = &self.experiment;
        check(
            !e.target_powers_dbm.is_empty(),
            "target_powers_dbm",
            "must not be empty",
        )?;
        check(
            e.target_powers_dbm.iter().all(|p| p.is_finite()),
            "target_powers_dbm",
            "must be finite",
        )?;
        check(
            e.attacker_power_dbm.is_finite(),
            "attacker_power_dbm",
            "must be finite",
        )?;
        check(
            e.frames_per_point >= t.window_frames,
            "frames_per_point",
            "must be at least window_frames",
        )?;
        check(
            e.windows_per_point >= 1,
            "windows_per_point",
            "must be at least 1",
        )?;
        check(!e.cases.is_empty(), "cases", "must not be empty")?;
        for name in &e.cases {
            name.parse::<CaseId>()
                .map_err(|err| constraint("cases", err.to_string()))?;
        }
        check(
            !e.roc_thresholds.is_empty(),
            "roc_thresholds",
            "must not be empty",
        )?;
        check(
            e.roc_thresholds.windows(2).all(|w| w[0] <= w[1])
                && e.roc_thresholds.iter().all(|t| !t.is_nan()),
            "roc_thresholds",
            "must be sorted ascending",
        )?;
        Ok(())
    }

    pub fn case_ids(&self) -> Vec<CaseId> {
        self.experiment
            .cases
            .iter()
            .filter_map(|c| c.parse().ok())
            .collect()
    }
}

/// 1-based line of the first `key = ...` assignment in `text`.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let message = e.message().to_string();
        ConfigError::Parse {
            key: backticked(&message),
            line,
            message,
        }
    })?;
    cfg.validate().map_err(|e| match e {
        ConfigError::Constraint { key, message, .. } => ConfigError::Constraint {
            line: line_of_key(text, &key),
            key,
            message,
        },
        other => other,
    })?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}
