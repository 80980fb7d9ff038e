//! Host-vehicle virtual coordinates against the streetlight lattice.

use serde::{Deserialize, Serialize};

use super::ranging::{horizontal_standoff, lateral_distance, longitudinal_offset};
use crate::error::{Error, Result};
use crate::occ::{BeaconId, BeaconPayload};

/// One ranged beacon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeMeasurement {
    pub beacon: BeaconId,
    /// metres
    pub direct_distance: f64,
    pub pixel_count: u64,
    /// Horizontal angle from the camera axis, right positive.
    pub bearing: f64,
    /// Horizontal image displacement from the centre plane, pixels.
    pub horizontal_displacement: f64,
    pub timestamp: f64,
}

/// Host position: lateral distance `h` to the streetlight line and along-road
/// distance `c` ahead to the anchor streetlight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvPositionState {
    pub h: f64,
    pub c: f64,
    pub anchor_sl: u16,
    /// Spacing of the lattice the anchor belongs to.
    pub spacing: f64,
    /// +1 when the streetlight line is on the host's left, -1 on the right.
    pub side: f64,
    pub speed_estimate: f64,
    pub last_bearings: (f64, f64),
    pub timestamp: f64,
}

impl HvPositionState {
    /// Host position in the anchor frame: origin at the anchor pole foot,
    /// `x` along the road, `y` lateral (left positive).
    pub fn anchor_frame(&self) -> (f64, f64) {
        (-self.c, -self.side * self.h)
    }
}

fn streetlight_fields(m: &RangeMeasurement) -> Result<(f64, f64)> {
    match m.beacon.payload {
        BeaconPayload::Streetlight { lamp_height, spacing } => Ok((lamp_height, spacing)),
        BeaconPayload::Vehicle { .. } => Err(Error::Geometry(format!(
            "beacon {} is a vehicle, not a streetlight",
            m.beacon.id
        ))),
    }
}

/// Raw geometry of one streetlight pair before normalisation to the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub a1: f64,
    pub a2: f64,
    /// Along-road distance to the nearer lamp of the pair.
    pub c_raw: f64,
    pub h: f64,
    pub spacing: f64,
}

/// Ground distances, along-road offset and lateral distance from two
/// consecutive streetlights.
pub fn pair_geometry(
    near: &RangeMeasurement,
    far: &RangeMeasurement,
    camera_height: f64,
) -> Result<PairGeometry> {
    if far.beacon.id != near.beacon.id.wrapping_add(1) {
        return Err(Error::Geometry(format!(
            "streetlights {} and {} are not consecutive",
            near.beacon.id, far.beacon.id
        )));
    }
    for m in [near, far] {
        if m.pixel_count < 1 {
            return Err(Error::SubPixel { pixels: m.pixel_count as f64 });
        }
    }
    let (h1, d) = streetlight_fields(near)?;
    let (h2, _) = streetlight_fields(far)?;
    let a1 = horizontal_standoff(near.direct_distance, h1 - camera_height)?;
    let a2 = horizontal_standoff(far.direct_distance, h2 - camera_height)?;
    let off = longitudinal_offset(a1, a2, d)?;
    let h = lateral_distance(a1, off.c)?;
    Ok(PairGeometry { a1, a2, c_raw: off.c, h, spacing: d })
}

/// Recomputes the host position from the two nearest consecutive
/// streetlights and re-anchors it on the lattice so that `0 <= c < d`.
pub fn update_hv_position(
    prev: Option<&HvPositionState>,
    near: &RangeMeasurement,
    far: &RangeMeasurement,
    camera_height: f64,
) -> Result<HvPositionState> {
    let g = pair_geometry(near, far, camera_height)?;
    let laps = (g.c_raw / g.spacing).floor();
    let mut c = g.c_raw - laps * g.spacing;
    if c >= g.spacing {
        c = 0.0;
    }
    let anchor = near.beacon.id as i64 - laps as i64;
    let anchor = u16::try_from(anchor)
        .map_err(|_| Error::Geometry(format!("anchor streetlight id {anchor} out of range")))?;
    let side = if near.bearing <= 0.0 { 1.0 } else { -1.0 };
    let timestamp = near.timestamp;
    let speed_estimate = match prev {
        Some(p) if timestamp > p.timestamp => {
            let laps = anchor as f64 - p.anchor_sl as f64;
            (laps * g.spacing - c + p.c) / (timestamp - p.timestamp)
        }
        Some(p) => p.speed_estimate,
        None => 0.0,
    };
    Ok(HvPositionState {
        h: g.h,
        c,
        anchor_sl: anchor,
        spacing: g.spacing,
        side,
        speed_estimate,
        last_bearings: (near.bearing, far.bearing),
        timestamp,
    })
}

/// Picks the two largest-footprint streetlights when they are consecutive.
pub fn nearest_streetlight_pair(
    measurements: &[RangeMeasurement],
) -> Result<(RangeMeasurement, RangeMeasurement)> {
    let mut sls: Vec<&RangeMeasurement> = measurements
        .iter()
        .filter(|m| matches!(m.beacon.payload, BeaconPayload::Streetlight { .. }))
        .collect();
    if sls.len() < 2 {
        return Err(Error::InsufficientBeacons(sls.len()));
    }
    sls.sort_by(|a, b| b.pixel_count.cmp(&a.pixel_count).then(a.beacon.id.cmp(&b.beacon.id)));
    let (x, y) = (*sls[0], *sls[1]);
    let (near, far) = if x.beacon.id < y.beacon.id { (x, y) } else { (y, x) };
    if far.beacon.id != near.beacon.id.wrapping_add(1) {
        return Err(Error::InsufficientBeacons(1));
    }
    Ok((near, far))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoadShape {
    Straight,
    Curved,
}

/// Bearing gap a straight road predicts between the two lamps of a pair.
pub fn predicted_bearing_gap(h: f64, c_raw: f64, spacing: f64) -> f64 {
    (h.atan2(c_raw) - h.atan2(c_raw + spacing)).abs()
}

/// Straight-road bearing gap of a pair with the road line placed from the
/// near lamp's own range and bearing.
pub fn pair_bearing_gap(near: &RangeMeasurement, spacing: f64, camera_height: f64) -> Result<f64> {
    let (lamp_height, _) = streetlight_fields(near)?;
    let a1 = horizontal_standoff(near.direct_distance, lamp_height - camera_height)?;
    Ok(predicted_bearing_gap(a1 * near.bearing.sin().abs(), a1 * near.bearing.cos(), spacing))
}

/// Flags a curved road when the measured bearing gap departs from the
/// straight-road prediction by more than `tolerance`.
pub fn curvature_check(theta1: f64, theta2: f64, predicted_gap: f64, tolerance: f64) -> RoadShape {
    if ((theta1 - theta2).abs() - predicted_gap).abs() > tolerance {
        RoadShape::Curved
    } else {
        RoadShape::Straight
    }
}
