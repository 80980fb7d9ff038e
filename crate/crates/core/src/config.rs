//! Scenario and experiment files.
//!
//! Files are TOML in the units of the parameter tables (km/h, mm, cm², µm,
//! degrees) and are converted to SI on load. Unknown keys are rejected so
//! that a typo surfaces as a configuration error naming the key.
//!
//! ```toml
//! duration_s = 6.0
//! seed = 7
//!
//! [camera]
//! focal_length_mm = 16.0
//! megapixels = 6.0
//!
//! [streetlight_row]
//! count = 40
//! spacing_m = 25.0
//!
//! [[vehicles]]
//! id = 1
//! host = true
//! speed_kmh = 30.0
//!
//! [[vehicles]]
//! id = 2
//! station_m = 20.0
//! speed_kmh = 30.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, ExposureSettings};
use crate::error::{Error, Result};
use crate::occ::ChannelParams;
use crate::scene::{
    kmh_to_ms, LedPanelSpec, Road, SceneState, StreetlightRow, StreetlightSpec, TaillightPair,
    VehicleSpec,
};

/// Estimation-side knobs of the per-frame loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSettings {
    /// Horizontal field of view used for the visibility test, radians.
    pub fov: f64,
    /// metres
    pub max_range: f64,
    /// Forward range below which an FV raises the collision flag.
    pub collision_threshold: f64,
    /// Bearing-gap residual above which the road is treated as curved.
    pub curvature_tolerance: f64,
    /// Taillight height assumed when projecting FV ranges to the ground.
    pub taillight_height: f64,
    /// Panel area every streetlight is known to carry, m².
    pub streetlight_panel_area: f64,
    pub cycles_per_bit: u32,
    /// Rasterize footprints; when false the continuous image area is used.
    pub rasterize: bool,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            fov: 100f64.to_radians(),
            max_range: 200.0,
            collision_threshold: 10.0,
            curvature_tolerance: 2f64.to_radians(),
            taillight_height: 1.0,
            streetlight_panel_area: LedPanelSpec::default().area(),
            cycles_per_bit: 5,
            rasterize: true,
        }
    }
}

/// A full scenario in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub road: Road,
    /// Explicitly placed streetlights.
    pub streetlights: Vec<StreetlightSpec>,
    /// Evenly spaced row, generated after the explicit list.
    pub streetlight_row: Option<StreetlightRow>,
    pub vehicles: Vec<VehicleSpec>,
    pub camera_height: f64,
    /// seconds
    pub duration: f64,
    pub rng_seed: u64,
    pub camera: CameraIntrinsics,
    pub exposure: ExposureSettings,
    pub channel: ChannelParams,
    pub pipeline: PipelineSettings,
}

impl ScenarioConfig {
    /// All streetlights, explicit ones first.
    pub fn all_streetlights(&self) -> Vec<StreetlightSpec> {
        let mut out = self.streetlights.clone();
        if let Some(row) = &self.streetlight_row {
            out.extend(row.generate(&self.road));
        }
        out
    }

    pub fn frame_count(&self) -> u64 {
        (self.duration * self.exposure.frame_rate + 1e-9).floor() as u64
    }

    pub fn build_scene(&self) -> Result<SceneState> {
        SceneState::new(self.road, self.all_streetlights(), self.vehicles.clone(), self.camera_height)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::Config("duration_s must be positive".into()));
        }
        if !(self.camera_height > 0.0) {
            return Err(Error::Config("camera_height_m must be positive".into()));
        }
        self.camera.validate()?;
        self.exposure.validate()?;
        self.channel.validate()?;
        let p = &self.pipeline;
        if !(p.fov > 0.0 && p.fov < std::f64::consts::PI) {
            return Err(Error::Config("pipeline.fov_deg must lie in (0, 180)".into()));
        }
        if !(p.max_range > 0.0) {
            return Err(Error::Config("pipeline.max_range_m must be positive".into()));
        }
        if !(p.streetlight_panel_area > 0.0) {
            return Err(Error::Config("pipeline.streetlight_panel_cm2 must be positive".into()));
        }
        if p.cycles_per_bit == 0 {
            return Err(Error::Config("pipeline.cycles_per_bit must be at least 1".into()));
        }
        self.build_scene().map(|_| ())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(toml_error)?;
        file.into_config()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn toml_error(e: toml::de::Error) -> Error {
    Error::Config(e.message().to_string())
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Sensor pixel count, megapixels.
    Resolution,
    /// Exposure time, seconds.
    Exposure,
    /// Speed of every forwarding vehicle, km/h.
    FvSpeed,
    /// Streetlight spacing, metres.
    SlSpacing,
    /// Link SINR, dB.
    Sinr,
    /// Emitted optical power, watts.
    LedPower,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 6] = [
        SweepParameter::Resolution,
        SweepParameter::Exposure,
        SweepParameter::FvSpeed,
        SweepParameter::SlSpacing,
        SweepParameter::Sinr,
        SweepParameter::LedPower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Resolution => "resolution",
            SweepParameter::Exposure => "exposure",
            SweepParameter::FvSpeed => "fv_speed",
            SweepParameter::SlSpacing => "sl_spacing",
            SweepParameter::Sinr => "sinr",
            SweepParameter::LedPower => "led_power",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepParameter::Resolution => "MP",
            SweepParameter::Exposure => "s",
            SweepParameter::FvSpeed => "km/h",
            SweepParameter::SlSpacing => "m",
            SweepParameter::Sinr => "dB",
            SweepParameter::LedPower => "W",
        }
    }

    /// BER sweeps exercise the link alone; the rest run the full pipeline.
    pub fn is_link_sweep(self) -> bool {
        matches!(self, SweepParameter::Sinr | SweepParameter::LedPower)
    }

    pub fn default_metric(self) -> ErrorMetric {
        match self {
            SweepParameter::FvSpeed => ErrorMetric::FvPosition,
            SweepParameter::SlSpacing => ErrorMetric::HvPosition,
            _ => ErrorMetric::FvRange,
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "experiment.parameter: unknown sweep parameter `{name}` (expected one of {})",
                    Self::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }

    /// Allowed range of sweep values, inclusive.
    fn range(self) -> (f64, f64) {
        match self {
            SweepParameter::Resolution => (0.1, 100.0),
            SweepParameter::Exposure => (1e-5, 1.0),
            SweepParameter::FvSpeed => (0.0, 250.0),
            SweepParameter::SlSpacing => (1.0, 255.0),
            SweepParameter::Sinr => (-30.0, 40.0),
            SweepParameter::LedPower => (1e-6, 1e3),
        }
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Error measured by a pipeline sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    /// |estimated - true| camera-to-taillight range.
    FvRange,
    /// Planar distance between the anchored FV estimate and the FV.
    FvWorld,
    /// Planar distance between the FV and its estimate placed from the
    /// true camera pose of the frame the measurement was taken in.
    FvPosition,
    /// Planar distance between the host estimate and the host.
    HvPosition,
}

/// A parameter sweep over a base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: ScenarioConfig,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
    pub metric: ErrorMetric,
    /// Uniform random shift (metres) applied to every vehicle's start
    /// station in each trial.
    pub start_jitter: f64,
    /// Uniform random lateral shift (metres, centred on zero) applied to
    /// every forwarding vehicle in each trial.
    pub lateral_jitter: f64,
    /// Curves of a BER sweep: channel-filter σ_c for `sinr`, payload bit
    /// rates in bps for `led_power`.
    pub series: Vec<f64>,
    /// Link distance of a BER sweep, metres.
    pub link_distance: f64,
    /// Payload bits per trial of a BER sweep.
    pub bits_per_trial: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("experiment.trials must be at least 1".into()));
        }
        if self.values.is_empty() {
            return Err(Error::Config("experiment.values must not be empty".into()));
        }
        let (lo, hi) = self.parameter.range();
        if let Some(v) = self.values.iter().find(|v| !(lo..=hi).contains(*v)) {
            return Err(Error::Config(format!(
                "experiment.values: {v} outside [{lo}, {hi}] for {}",
                self.parameter
            )));
        }
        if !(self.start_jitter >= 0.0) {
            return Err(Error::Config("experiment.start_jitter_m must be non-negative".into()));
        }
        if !(self.lateral_jitter >= 0.0) {
            return Err(Error::Config("experiment.lateral_jitter_m must be non-negative".into()));
        }
        if self.parameter.is_link_sweep() {
            if !(self.link_distance > 0.0) {
                return Err(Error::Config("experiment.link_distance_m must be positive".into()));
            }
            if self.bits_per_trial == 0 {
                return Err(Error::Config("experiment.bits_per_trial must be at least 1".into()));
            }
            if self.series.iter().any(|s| !(*s >= 0.0)) {
                return Err(Error::Config("experiment.series must be non-negative".into()));
            }
        }
        if self.parameter == SweepParameter::SlSpacing && self.base.streetlight_row.is_none() {
            return Err(Error::Config(
                "experiment: an sl_spacing sweep needs a [streetlight_row]".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(toml_error)?;
        let exp = file
            .experiment
            .clone()
            .ok_or_else(|| Error::Config("missing [experiment] table".into()))?;
        let base = file.into_config()?;
        let parameter = SweepParameter::parse(&exp.parameter)?;
        let metric = match exp.metric {
            Some(m) => m,
            None => parameter.default_metric(),
        };
        let series = exp.series.unwrap_or_else(|| match parameter {
            SweepParameter::Sinr => vec![0.1, 0.5, 1.0],
            SweepParameter::LedPower => vec![1.0, 2.0, 5.0],
            _ => Vec::new(),
        });
        let spec = Self {
            seed: exp.seed.unwrap_or(base.rng_seed),
            base,
            parameter,
            values: exp.values,
            trials: exp.trials,
            metric,
            start_jitter: exp.start_jitter_m,
            lateral_jitter: exp.lateral_jitter_m,
            series,
            link_distance: exp.link_distance_m,
            bits_per_trial: exp.bits_per_trial,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?)
    }

    /// Bundled experiment for one parameter, as shipped in `presets/`.
    pub fn preset(parameter: SweepParameter) -> Self {
        let text = match parameter {
            SweepParameter::Resolution => include_str!("../presets/resolution.toml"),
            SweepParameter::Exposure => include_str!("../presets/exposure.toml"),
            SweepParameter::FvSpeed => include_str!("../presets/fv_speed.toml"),
            SweepParameter::SlSpacing => include_str!("../presets/sl_spacing.toml"),
            SweepParameter::Sinr => include_str!("../presets/sinr.toml"),
            SweepParameter::LedPower => include_str!("../presets/led_power.toml"),
        };
        Self::from_toml_str(text).expect("bundled preset parses")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default = "default_duration")]
    duration_s: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_camera_height")]
    camera_height_m: f64,
    #[serde(default)]
    road_curvature_per_m: f64,
    #[serde(default)]
    camera: CameraFile,
    #[serde(default)]
    channel: ChannelFile,
    #[serde(default)]
    pipeline: PipelineFile,
    #[serde(default)]
    streetlights: Vec<StreetlightFile>,
    streetlight_row: Option<RowFile>,
    #[serde(default)]
    vehicles: Vec<VehicleFile>,
    experiment: Option<ExperimentFile>,
}

fn default_duration() -> f64 {
    10.0
}

fn default_camera_height() -> f64 {
    1.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CameraFile {
    focal_length_mm: f64,
    sensor_width_mm: f64,
    sensor_height_mm: f64,
    megapixels: f64,
    aperture_f_number: f64,
    exposure_s: f64,
    frame_rate_fps: f64,
}

impl Default for CameraFile {
    fn default() -> Self {
        Self {
            focal_length_mm: 16.0,
            sensor_width_mm: 36.0,
            sensor_height_mm: 24.0,
            megapixels: 6.0,
            aperture_f_number: 4.0,
            exposure_s: 1.0 / 2000.0,
            frame_rate_fps: 30.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ChannelFile {
    kappa: f64,
    noise_psd_w_per_hz: f64,
    bandwidth_hz: f64,
    power_conversion: f64,
    concentrator_gain: f64,
    filter_transmission: f64,
    alpha: f64,
    sigma_c: f64,
}

impl Default for ChannelFile {
    fn default() -> Self {
        let c = ChannelParams::default();
        Self {
            kappa: c.kappa,
            noise_psd_w_per_hz: c.noise_psd,
            bandwidth_hz: c.bandwidth,
            power_conversion: c.power_conversion,
            concentrator_gain: c.concentrator_gain,
            filter_transmission: c.filter_transmission,
            alpha: c.alpha,
            sigma_c: c.sigma_c,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PipelineFile {
    fov_deg: f64,
    max_range_m: f64,
    collision_threshold_m: f64,
    curvature_tolerance_deg: f64,
    taillight_height_m: f64,
    streetlight_panel_cm2: f64,
    cycles_per_bit: u32,
    rasterize: bool,
}

impl Default for PipelineFile {
    fn default() -> Self {
        let p = PipelineSettings::default();
        Self {
            fov_deg: p.fov.to_degrees(),
            max_range_m: p.max_range,
            collision_threshold_m: p.collision_threshold,
            curvature_tolerance_deg: p.curvature_tolerance.to_degrees(),
            taillight_height_m: p.taillight_height,
            streetlight_panel_cm2: p.streetlight_panel_area * 1e4,
            cycles_per_bit: p.cycles_per_bit,
            rasterize: p.rasterize,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PanelFile {
    width_cm: f64,
    height_cm: f64,
    power_w: f64,
    lambertian_order: f64,
}

impl Default for PanelFile {
    fn default() -> Self {
        let p = LedPanelSpec::default();
        Self {
            width_cm: p.width * 100.0,
            height_cm: p.height * 100.0,
            power_w: p.emitted_optical_power,
            lambertian_order: p.lambertian_order,
        }
    }
}

impl PanelFile {
    fn to_spec(&self) -> LedPanelSpec {
        LedPanelSpec {
            width: self.width_cm / 100.0,
            height: self.height_cm / 100.0,
            emitted_optical_power: self.power_w,
            lambertian_order: self.lambertian_order,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct StreetlightFile {
    id: u16,
    station_m: f64,
    #[serde(default = "default_lateral")]
    lateral_offset_m: f64,
    #[serde(default = "default_lamp_height")]
    lamp_height_m: f64,
    #[serde(default = "default_spacing")]
    spacing_m: f64,
    #[serde(default)]
    panel: PanelFile,
}

fn default_lateral() -> f64 {
    10.0
}

fn default_lamp_height() -> f64 {
    7.0
}

fn default_spacing() -> f64 {
    25.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RowFile {
    first_id: u16,
    count: usize,
    first_station_m: f64,
    spacing_m: f64,
    lateral_offset_m: f64,
    lamp_height_m: f64,
    panel: PanelFile,
}

impl Default for RowFile {
    fn default() -> Self {
        let r = StreetlightRow::default();
        Self {
            first_id: r.first_id,
            count: r.count,
            first_station_m: r.first_station,
            spacing_m: r.spacing,
            lateral_offset_m: r.lateral_offset,
            lamp_height_m: r.lamp_height,
            panel: PanelFile::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleFile {
    id: u16,
    #[serde(default)]
    host: bool,
    #[serde(default)]
    station_m: f64,
    #[serde(default)]
    lane_offset_m: f64,
    speed_kmh: f64,
    #[serde(default = "default_separation")]
    taillight_separation_m: f64,
    #[serde(default = "default_mount_height")]
    taillight_height_m: f64,
    #[serde(default)]
    taillight_panel: PanelFile,
}

fn default_separation() -> f64 {
    TaillightPair::default().separation
}

fn default_mount_height() -> f64 {
    TaillightPair::default().mount_height
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    parameter: String,
    values: Vec<f64>,
    #[serde(default = "default_trials")]
    trials: u32,
    seed: Option<u64>,
    metric: Option<ErrorMetric>,
    #[serde(default)]
    start_jitter_m: f64,
    #[serde(default)]
    lateral_jitter_m: f64,
    series: Option<Vec<f64>>,
    #[serde(default = "default_link_distance")]
    link_distance_m: f64,
    #[serde(default = "default_bits")]
    bits_per_trial: u64,
}

fn default_trials() -> u32 {
    1
}

fn default_link_distance() -> f64 {
    100.0
}

fn default_bits() -> u64 {
    10_000
}

impl ScenarioFile {
    fn into_config(self) -> Result<ScenarioConfig> {
        let cam = &self.camera;
        for (name, v) in [
            ("camera.focal_length_mm", cam.focal_length_mm),
            ("camera.sensor_width_mm", cam.sensor_width_mm),
            ("camera.sensor_height_mm", cam.sensor_height_mm),
            ("camera.megapixels", cam.megapixels),
            ("camera.exposure_s", cam.exposure_s),
            ("camera.frame_rate_fps", cam.frame_rate_fps),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let mut camera = CameraIntrinsics::from_sensor(
            cam.focal_length_mm * 1e-3,
            cam.sensor_width_mm * 1e-3,
            cam.sensor_height_mm * 1e-3,
            cam.megapixels,
        );
        camera.aperture_f_number = cam.aperture_f_number;
        let exposure = ExposureSettings {
            exposure_time: cam.exposure_s,
            frame_rate: cam.frame_rate_fps,
        };
        let ch = &self.channel;
        let channel = ChannelParams {
            kappa: ch.kappa,
            noise_psd: ch.noise_psd_w_per_hz,
            bandwidth: ch.bandwidth_hz,
            power_conversion: ch.power_conversion,
            interferer_gains: Vec::new(),
            concentrator_gain: ch.concentrator_gain,
            filter_transmission: ch.filter_transmission,
            alpha: ch.alpha,
            sigma_c: ch.sigma_c,
        };
        let p = &self.pipeline;
        let pipeline = PipelineSettings {
            fov: p.fov_deg.to_radians(),
            max_range: p.max_range_m,
            collision_threshold: p.collision_threshold_m,
            curvature_tolerance: p.curvature_tolerance_deg.to_radians(),
            taillight_height: p.taillight_height_m,
            streetlight_panel_area: p.streetlight_panel_cm2 * 1e-4,
            cycles_per_bit: p.cycles_per_bit,
            rasterize: p.rasterize,
        };
        let road = Road { curvature: self.road_curvature_per_m };
        let streetlights = self
            .streetlights
            .iter()
            .map(|s| StreetlightSpec {
                id: s.id,
                base: road.to_world(s.station_m, s.lateral_offset_m).0,
                lamp_height: s.lamp_height_m,
                spacing_to_next: s.spacing_m,
                station: s.station_m,
                panel: s.panel.to_spec(),
            })
            .collect();
        let streetlight_row = self.streetlight_row.as_ref().map(|r| StreetlightRow {
            first_id: r.first_id,
            count: r.count,
            first_station: r.first_station_m,
            spacing: r.spacing_m,
            lateral_offset: r.lateral_offset_m,
            lamp_height: r.lamp_height_m,
            panel: r.panel.to_spec(),
        });
        let vehicles = self
            .vehicles
            .iter()
            .map(|v| VehicleSpec {
                id: v.id,
                is_host: v.host,
                station: v.station_m,
                lane_offset: v.lane_offset_m,
                speed: kmh_to_ms(v.speed_kmh),
                taillights: TaillightPair {
                    panel: v.taillight_panel.to_spec(),
                    separation: v.taillight_separation_m,
                    mount_height: v.taillight_height_m,
                },
            })
            .collect();
        let config = ScenarioConfig {
            road,
            streetlights,
            streetlight_row,
            vehicles,
            camera_height: self.camera_height_m,
            duration: self.duration_s,
            rng_seed: self.seed,
            camera,
            exposure,
            channel,
            pipeline,
        };
        config.validate()?;
        Ok(config)
    }
}
