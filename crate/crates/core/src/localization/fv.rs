//! Forwarding-vehicle range, bearing and collision flag.

use serde::{Deserialize, Serialize};

use super::hv::{HvPositionState, RangeMeasurement};
use super::ranging::horizontal_standoff;
use crate::error::{Error, Result};
use crate::scene::WorldPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvPositionEstimate {
    pub fv_id: u16,
    /// Direct distance to the taillight midpoint, metres.
    pub range: f64,
    /// Horizontal angle of the midpoint, right positive.
    pub bearing: f64,
    pub horizontal_displacement: f64,
    /// Position in the host frame: `x` forward, `y` left, `z` lamp height.
    pub relative: WorldPoint,
    /// Position in the anchor frame of the host state, when anchored.
    pub world_estimate: Option<WorldPoint>,
    pub relative_speed: f64,
    pub collision_flag: bool,
    pub timestamp: f64,
}

impl FvPositionEstimate {
    pub fn anchored(&self) -> bool {
        self.world_estimate.is_some()
    }
}

/// Both ranged lamps of one taillight pair; `right` is `None` when one
/// lamp is hidden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaillightObservation {
    pub fv_id: u16,
    pub left: RangeMeasurement,
    pub right: Option<RangeMeasurement>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FvSettings {
    pub collision_threshold: f64,
    pub camera_height: f64,
    pub taillight_height: f64,
}

pub fn estimate_fv_position(
    hv: Option<&HvPositionState>,
    obs: &TaillightObservation,
    prev: Option<&FvPositionEstimate>,
    settings: &FvSettings,
) -> Result<FvPositionEstimate> {
    let right = obs.right.ok_or(Error::Occluded(obs.fv_id))?;
    let left = obs.left;
    for m in [&left, &right] {
        if m.pixel_count < 1 {
            return Err(Error::SubPixel { pixels: m.pixel_count as f64 });
        }
    }
    let dz = settings.taillight_height - settings.camera_height;
    // Each lamp on the ground plane of the host frame, then their midpoint.
    let lamp = |m: &RangeMeasurement| {
        let a = horizontal_standoff(m.direct_distance, dz).unwrap_or(m.direct_distance);
        (a * m.bearing.cos(), -a * m.bearing.sin())
    };
    let (lx, ly) = lamp(&left);
    let (rx, ry) = lamp(&right);
    let relative = WorldPoint::new((lx + rx) / 2.0, (ly + ry) / 2.0, settings.taillight_height);
    let range = relative.x.hypot(relative.y).hypot(dz);
    let bearing = (-relative.y).atan2(relative.x);
    let displacement = (left.horizontal_displacement + right.horizontal_displacement) / 2.0;
    let world_estimate = hv.map(|s| {
        let (hx, hy) = s.anchor_frame();
        WorldPoint::new(hx + relative.x, hy + relative.y, relative.z)
    });
    let timestamp = left.timestamp;
    let relative_speed = match prev {
        Some(p) if timestamp > p.timestamp => (range - p.range) / (timestamp - p.timestamp),
        _ => 0.0,
    };
    Ok(FvPositionEstimate {
        fv_id: obs.fv_id,
        range,
        bearing,
        horizontal_displacement: displacement,
        relative,
        world_estimate,
        relative_speed,
        collision_flag: range < settings.collision_threshold,
        timestamp,
    })
}
