//! Shared scenarios for the criterion benchmarks.

use std::sync::Arc;

use splitplan::arch::{propagate, reference_architecture, toy_architecture, CutProfile};
use splitplan::harness::ExperimentConfig;
use splitplan::{NetworkInstance, TensorShape};

/// Cut profile of the shipped reference network.
pub fn reference_profile() -> Arc<CutProfile> {
    Arc::new(propagate(&reference_architecture()).expect("reference network is valid"))
}

/// Cut profile of the four-module toy network used by the oracles.
pub fn toy_profile() -> Arc<CutProfile> {
    Arc::new(propagate(&toy_architecture(TensorShape::new(3, 64, 128), 4)).expect("toy network is valid"))
}

/// Default-parameter network with `devices` devices and the fading of
/// trial `trial` (seed 1).
pub fn default_network(profile: &Arc<CutProfile>, devices: usize, trial: u64) -> NetworkInstance {
    let config = ExperimentConfig {
        devices,
        ..ExperimentConfig::default()
    };
    config.network(profile, trial).expect("default config is valid")
}

/// Two-device toy network small enough for the brute-force oracles.
pub fn toy_network(profile: &Arc<CutProfile>, trial: u64) -> NetworkInstance {
    let config = ExperimentConfig {
        devices: 2,
        device_compute: 2e6,
        server_compute: 10e6,
        spectrum_hz: 100e3,
        seed: 7,
        ..ExperimentConfig::default()
    };
    config.network(profile, trial).expect("toy config is valid")
}
