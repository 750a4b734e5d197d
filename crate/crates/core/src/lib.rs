//! Simulation of RSS-based cell localization of an IoT target in a
//! six-anchor hexagonal neighbourhood, under jamming, spoofing, beacon
//! synchronized and amplify-and-forward relay attacks, with power-gap and
//! KL-divergence detectors.

pub mod attack;
pub mod channel;
pub mod cli;
pub mod config;
pub mod deployment;
pub mod detection;
pub mod experiment;
pub mod frame;
pub mod localization;
pub mod receiver;
pub mod selftest;
