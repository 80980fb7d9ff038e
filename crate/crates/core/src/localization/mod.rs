//! Estimation: photogrammetric ranging, host position from streetlight
//! pairs, curvature detection and forwarding-vehicle positioning.

pub mod fv;
pub mod hv;
pub mod ranging;
pub mod roi;

pub use fv::{estimate_fv_position, FvPositionEstimate, FvSettings, TaillightObservation};
pub use hv::{
    curvature_check, nearest_streetlight_pair, pair_bearing_gap, pair_geometry, predicted_bearing_gap,
    update_hv_position, HvPositionState, RangeMeasurement, RoadShape,
};
pub use ranging::{
    bearing_from_displacement, distance_from_pixels, horizontal_standoff, lateral_distance,
    longitudinal_offset, LongitudinalOffset,
};
pub use roi::{select_roi, DecodedFootprint, Roi};
