//! Fixtures shared by the benchmarks.

use occloc_core::config::{ExperimentSpec, SweepParameter};
use occloc_core::ScenarioConfig;

/// Two-vehicle straight-road scenario with a streetlight row, `seconds`
/// long.
pub fn highway(seconds: f64) -> ScenarioConfig {
    let mut cfg = ExperimentSpec::preset(SweepParameter::FvSpeed).base;
    cfg.duration = seconds;
    cfg
}
