//! Photogrammetric ranging and the streetlight triangle relations.
//!
//! Top view, host camera `H`, consecutive lamps `SL1`, `SL2` spaced `d`
//! along a line at lateral distance `h`; `c` is the along-road distance from
//! the host to the foot of `SL1`:
//!
//! ```text
//! a1² = c² + h²
//! a2² = (d + c)² + h²
//! ```

use crate::camera::CameraIntrinsics;
use crate::error::{Error, Result};

/// Direct distance from the pixel area of a panel of physical area `area`.
pub fn distance_from_pixels(area: f64, pixel_count: f64, intr: &CameraIntrinsics) -> Result<f64> {
    if !(area > 0.0) {
        return Err(Error::Geometry(format!("panel area must be positive, got {area}")));
    }
    if !(pixel_count >= 1.0) {
        return Err(Error::SubPixel { pixels: pixel_count });
    }
    Ok(intr.focal_length / intr.pixel_pitch * (area / pixel_count).sqrt())
}

/// Ground-plane distance from a direct distance and the height difference
/// between camera and lamp.
pub fn horizontal_standoff(direct: f64, height_diff: f64) -> Result<f64> {
    let dz = height_diff.abs();
    if !(direct > dz) {
        return Err(Error::Geometry(format!(
            "direct distance {direct} m does not exceed height difference {dz} m"
        )));
    }
    Ok((direct * direct - dz * dz).sqrt())
}

/// Along-road offset `c` from the two ground distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongitudinalOffset {
    pub c: f64,
    /// `0 <= c < d`.
    pub in_band: bool,
}

pub fn longitudinal_offset(a1: f64, a2: f64, d: f64) -> Result<LongitudinalOffset> {
    if !(d > 0.0) {
        return Err(Error::Geometry(format!("streetlight spacing must be positive, got {d}")));
    }
    let c = ((a2 * a2 - a1 * a1) - d * d) / (2.0 * d);
    Ok(LongitudinalOffset {
        c,
        in_band: (0.0..d).contains(&c),
    })
}

/// Lateral distance `h` to the streetlight line.
pub fn lateral_distance(a1: f64, c: f64) -> Result<f64> {
    if !(a1 > c.abs()) {
        return Err(Error::Geometry(format!(
            "ground distance {a1} m does not exceed along-road offset {c} m"
        )));
    }
    Ok((a1 * a1 - c * c).sqrt())
}

/// Horizontal angle of a beacon from its image displacement off the centre
/// plane; right positive.
pub fn bearing_from_displacement(displacement_px: f64, intr: &CameraIntrinsics) -> f64 {
    (displacement_px * intr.pixel_pitch / intr.focal_length).atan()
}
