//! Vehicle localization from optical camera communication and photogrammetry.
//!
//! Streetlights and forwarding vehicles broadcast identity packets with
//! spatial two-phase shift keying over LED pairs. A forward camera on the
//! host vehicle decodes those packets, ranges every beacon from the number
//! of pixels its image covers, places itself against the streetlight
//! lattice and then positions the vehicles ahead relative to itself.
//!
//! - [`scene`]: road, streetlights and vehicles stepped in time
//! - [`camera`]: pinhole projection and pixel footprints
//! - [`occ`]: S2-PSK modulation, channel and bit-error models
//! - [`localization`]: ranging, host triangulation, vehicle positioning
//! - [`sim`]: frame-by-frame pipeline and parameter sweeps
//! - [`config`]: TOML scenario and experiment files

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod config;
pub mod error;
pub mod localization;
pub mod occ;
pub mod scene;
pub mod sim;

pub use camera::{CameraExtrinsics, CameraIntrinsics, ExposureSettings, PixelFootprint};
pub use config::{ExperimentSpec, PipelineSettings, ScenarioConfig, SweepParameter};
pub use error::{Error, Result};
pub use localization::{FvPositionEstimate, HvPositionState, RangeMeasurement};
pub use occ::{BeaconId, ChannelParams};
pub use scene::{BeaconKey, LedPanelSpec, SceneState, StreetlightSpec, VehicleSpec, WorldPoint};
pub use sim::{ErrorStats, FrameRecord, PipelineOutput, SweepRow};
