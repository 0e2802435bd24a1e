//! Fixtures shared by the benchmarks.

use std::f64::consts::FRAC_PI_4;

use eip_core::circuit::{simulate_stream, CircuitConfig};
use eip_core::scene::{make_sphere_scene, ScenePreset};
use eip_core::{EventStream, LightTrajectory, PixelThresholds, SceneSpec};

pub const THRESHOLD: f64 = 0.05;
pub const OFFSET: f64 = 0.1;

pub fn trajectory() -> LightTrajectory {
    LightTrajectory::circular(FRAC_PI_4, 1.0, 0.0).expect("valid trajectory")
}

pub fn diffuse_scene(resolution: usize) -> SceneSpec {
    make_sphere_scene(resolution, ScenePreset::Diffuse)
        .and_then(|s| s.with_offset_light(OFFSET))
        .expect("valid scene")
}

pub fn thresholds(resolution: usize) -> PixelThresholds {
    PixelThresholds::uniform(resolution, resolution, THRESHOLD, -THRESHOLD)
        .expect("valid thresholds")
}

pub fn circuit(resolution: usize) -> CircuitConfig {
    CircuitConfig::ideal(thresholds(resolution))
}

/// Noiseless recording of the diffuse sphere over `cycles` periods.
pub fn diffuse_stream(resolution: usize, cycles: usize) -> EventStream {
    simulate_stream(
        &diffuse_scene(resolution),
        &trajectory(),
        cycles,
        &circuit(resolution),
    )
    .expect("simulation succeeds")
}
