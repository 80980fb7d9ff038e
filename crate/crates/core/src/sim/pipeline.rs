//! The per-frame localization loop.
//!
//! Every frame the host camera images each visible beacon, feeds the LED
//! pair states of that frame to a per-beacon packet receiver and, for
//! beacons whose identity is already decoded, ranges them from their pixel
//! footprints. Estimation runs one frame late: the estimate published at
//! frame `k` is computed from the measurements of frame `k - 1`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{ErrorSample, ErrorStats};
use crate::camera::{
    full_projection, panel_footprint_at, smear_footprint, CameraExtrinsics, CameraIntrinsics,
    PixelFootprint,
};
use crate::config::{ErrorMetric, ScenarioConfig};
use crate::error::Result;
use crate::localization::{
    bearing_from_displacement, curvature_check, distance_from_pixels, estimate_fv_position,
    nearest_streetlight_pair, pair_bearing_gap, update_hv_position, FvPositionEstimate,
    FvSettings, HvPositionState, RangeMeasurement, RoadShape, TaillightObservation,
};
use crate::occ::{
    channel_gain, filtered_sinr, led_state_error_prob, sinr, BeaconId, BeaconPayload,
    BeaconTransmitter, PacketReceiver, RxEvent, PACKET_CHIPS,
};
use crate::scene::{BeaconKey, Pose, SceneState, Side, VisibleBeacon, WorldPoint};

/// How the published host estimate of a frame came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HvStatus {
    /// Recomputed from the previous frame's streetlight pair.
    Fresh,
    /// No usable pair; the last valid estimate is republished.
    Held,
    /// The pair's bearings disagree with a straight road; the last valid
    /// estimate is republished.
    Curved,
    /// No estimate yet.
    Unavailable,
}

impl HvStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            HvStatus::Fresh => "fresh",
            HvStatus::Held => "held",
            HvStatus::Curved => "curved",
            HvStatus::Unavailable => "unavailable",
        }
    }
}

/// Host-side record of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: u64,
    pub time: f64,
    pub hv: Option<HvPositionState>,
    pub hv_status: HvStatus,
    /// True host position in the anchor frame of `hv`.
    pub hv_truth: Option<(f64, f64)>,
    pub hv_error: Option<f64>,
    /// True distance from the camera to the lamp of the true nearest
    /// streetlight ahead; the yardstick of the host accuracy.
    pub hv_reference: f64,
    pub visible: usize,
    pub decoded: usize,
    pub measured: usize,
}

/// Record of one forwarding vehicle in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FvRecord {
    pub frame: u64,
    pub time: f64,
    pub fv_id: u16,
    pub estimate: Option<FvPositionEstimate>,
    pub true_range: f64,
    pub range_error: Option<f64>,
    /// True taillight midpoint in the anchor frame of the estimate.
    pub true_world: Option<(f64, f64)>,
    pub world_error: Option<f64>,
    pub position_error: Option<f64>,
    pub true_collision: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub frames: Vec<FrameRecord>,
    pub fv: Vec<FvRecord>,
}

impl PipelineOutput {
    pub fn samples(&self, metric: ErrorMetric) -> Vec<ErrorSample> {
        match metric {
            ErrorMetric::HvPosition => self
                .frames
                .iter()
                .map(|f| ErrorSample { error: f.hv_error, reference: f.hv_reference })
                .collect(),
            ErrorMetric::FvRange => self
                .fv
                .iter()
                .map(|r| ErrorSample { error: r.range_error, reference: r.true_range })
                .collect(),
            ErrorMetric::FvWorld => self
                .fv
                .iter()
                .map(|r| ErrorSample { error: r.world_error, reference: r.true_range })
                .collect(),
            ErrorMetric::FvPosition => self
                .fv
                .iter()
                .map(|r| ErrorSample { error: r.position_error, reference: r.true_range })
                .collect(),
        }
    }

    pub fn stats(&self, metric: ErrorMetric) -> ErrorStats {
        ErrorStats::from_samples(&self.samples(metric))
    }
}

/// Transmitting unit: a streetlight, or a vehicle whose two taillights
/// form the LED pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum LinkKey {
    Streetlight(u16),
    Vehicle(u16),
}

impl LinkKey {
    fn of(key: BeaconKey) -> Self {
        match key {
            BeaconKey::Streetlight(id) => LinkKey::Streetlight(id),
            BeaconKey::Taillight { vehicle, .. } => LinkKey::Vehicle(vehicle),
        }
    }

    fn code(self) -> u64 {
        match self {
            LinkKey::Streetlight(id) => id as u64,
            LinkKey::Vehicle(id) => 0x1_0000 | id as u64,
        }
    }
}

#[derive(Debug, Clone)]
struct Track {
    tx: BeaconTransmitter,
    rx: PacketReceiver,
    decoded: Option<BeaconId>,
    last_frame: Option<u64>,
}

/// A beacon imaged in one frame.
#[derive(Debug, Clone)]
struct Imaged {
    key: BeaconKey,
    footprint: PixelFootprint,
    pixels: f64,
    p_flip: f64,
}

#[derive(Debug, Clone, Default)]
struct Measurements {
    streetlights: Vec<RangeMeasurement>,
    vehicles: Vec<TaillightObservation>,
}

fn transmitted_id(scene: &SceneState, link: LinkKey) -> Option<BeaconId> {
    match link {
        LinkKey::Streetlight(id) => scene
            .streetlight(id)
            .map(|s| BeaconId::streetlight(id, s.lamp_height, s.spacing_to_next)),
        LinkKey::Vehicle(id) => scene
            .vehicle(id)
            .map(|v| BeaconId::vehicle(id, v.taillights.panel.area())),
    }
}

fn packet_phase(seed: u64, link: LinkKey) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ link.code().wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.random_range(0..PACKET_CHIPS)
}

fn inside_sensor(outline: &[(f64, f64)], intr: &CameraIntrinsics) -> bool {
    let (w, h) = (intr.width_px as f64, intr.height_px as f64);
    outline.iter().all(|&(u, v)| (0.0..=w).contains(&u) && (0.0..=h).contains(&v))
}

fn bbox(outline: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    outline.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(u, v)| (a.min(u), b.min(v), c.max(u), d.max(v)),
    )
}

fn overlap_fraction(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (a0, a1, a2, a3) = bbox(a);
    let (b0, b1, b2, b3) = bbox(b);
    let w = (a2.min(b2) - a0.max(b0)).max(0.0);
    let h = (a3.min(b3) - a1.max(b1)).max(0.0);
    let area = (a2 - a0) * (a3 - a1);
    if area > 0.0 {
        (w * h / area).min(1.0)
    } else {
        0.0
    }
}

/// Road-frame station and lateral offset of a streetlight id, extrapolated
/// along the row when the id is not in the scene.
fn streetlight_road_position(scene: &SceneState, id: u16) -> Option<(f64, f64, f64)> {
    let lateral_of = |s: &crate::scene::StreetlightSpec| {
        let k = scene.road.curvature;
        if k == 0.0 {
            s.base.y
        } else {
            let radius = 1.0 / k;
            let r = radius.signum() * s.base.x.hypot(radius - s.base.y);
            radius - r
        }
    };
    if let Some(s) = scene.streetlight(id) {
        return Some((s.station, lateral_of(s), s.lamp_height));
    }
    let first = scene.streetlights.first()?;
    let station = first.station + (id as f64 - first.id as f64) * first.spacing_to_next;
    Some((station, lateral_of(first), first.lamp_height))
}

fn camera_position(scene: &SceneState) -> WorldPoint {
    scene.camera_pose().position
}

/// Distance from the camera to the first streetlight lamp at or ahead of
/// the host.
fn nearest_lamp_ahead(scene: &SceneState) -> f64 {
    let host = scene.host().station;
    let cam = camera_position(scene);
    scene
        .streetlights
        .iter()
        .filter(|s| s.station >= host)
        .min_by(|a, b| a.station.total_cmp(&b.station))
        .map(|s| cam.distance(&s.lamp()))
        .unwrap_or(f64::NAN)
}

struct Imager<'a> {
    cfg: &'a ScenarioConfig,
}

impl Imager<'_> {
    /// Footprints of every visible beacon fully inside the sensor and at
    /// least one pixel large, with their per-frame LED flip probabilities.
    fn image(&self, scene: &SceneState, visible: &[VisibleBeacon]) -> Vec<Imaged> {
        let cfg = self.cfg;
        let intr = &cfg.camera;
        let extr = CameraExtrinsics::looking_along(&scene.camera_pose());
        let te = cfg.exposure.exposure_time;
        let later = scene.advance(te);
        let extr_later = CameraExtrinsics::looking_along(&later.camera_pose());
        let mut shots: Vec<(VisibleBeacon, PixelFootprint, f64, f64)> = Vec::new();
        for vb in visible {
            let Ok(center) = full_projection(&vb.center, intr, &extr) else {
                continue;
            };
            let Ok(mut fp) = panel_footprint_at(&vb.panel, vb.direct_distance, center, intr) else {
                continue;
            };
            fp.source_beacon = Some(vb.key);
            if let Some((c2, _)) = later.beacon_center(vb.key) {
                if let Ok(moved) = full_projection(&c2, intr, &extr_later) {
                    let vel = ((moved.0 - center.0) / te, (moved.1 - center.1) / te);
                    fp = smear_footprint(&fp, vel, &cfg.exposure, intr);
                }
            }
            if !inside_sensor(&fp.outline, intr) {
                continue;
            }
            let pixels = if cfg.pipeline.rasterize {
                fp.pixel_count as f64
            } else {
                fp.continuous_area
            };
            if pixels < 1.0 {
                continue;
            }
            let a_c = {
                let (w, h) = intr.sensor_size();
                w * h
            };
            let gain = channel_gain(
                vb.panel.lambertian_order,
                a_c,
                vb.direct_distance,
                vb.incidence,
                vb.irradiation,
                cfg.channel.concentrator_gain,
                cfg.channel.filter_transmission,
            );
            shots.push((*vb, fp, gain * vb.panel.emitted_optical_power, pixels));
        }
        let mut out = Vec::with_capacity(shots.len());
        for (i, (vb, fp, hp, pixels)) in shots.iter().enumerate() {
            let mut channel = cfg.channel.clone();
            for (j, (_, other, other_hp, _)) in shots.iter().enumerate() {
                if i == j {
                    continue;
                }
                let w = overlap_fraction(&fp.outline, &other.outline);
                if w > 0.0 {
                    channel.interferer_gains.push(w * other_hp / vb.panel.emitted_optical_power);
                }
            }
            let h = hp / vb.panel.emitted_optical_power;
            let s = sinr(&channel, h, vb.panel.emitted_optical_power).unwrap_or(f64::INFINITY);
            let p_e = led_state_error_prob(filtered_sinr(s, channel.sigma_c));
            out.push(Imaged {
                key: vb.key,
                footprint: fp.clone(),
                pixels: *pixels,
                p_flip: (channel.alpha * p_e).min(1.0),
            });
        }
        out
    }
}

fn flip<R: Rng>(state: u8, p: f64, rng: &mut R) -> u8 {
    if p > 0.0 && rng.random::<f64>() < p {
        1 - state
    } else {
        state
    }
}

fn measure(
    img: &Imaged,
    id: BeaconId,
    area: f64,
    intr: &CameraIntrinsics,
    time: f64,
) -> Option<RangeMeasurement> {
    let direct_distance = distance_from_pixels(area, img.pixels, intr).ok()?;
    let disp = img.footprint.horizontal_displacement;
    Some(RangeMeasurement {
        beacon: id,
        direct_distance,
        pixel_count: img.footprint.pixel_count,
        bearing: bearing_from_displacement(disp, intr),
        horizontal_displacement: disp,
        timestamp: time,
    })
}

/// Runs the scenario frame by frame.
pub fn run_pipeline(cfg: &ScenarioConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let mut scene = cfg.build_scene()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let dt = cfg.exposure.frame_period();
    let intr = cfg.camera;
    let imager = Imager { cfg };
    let fv_settings = FvSettings {
        collision_threshold: cfg.pipeline.collision_threshold,
        camera_height: cfg.camera_height,
        taillight_height: cfg.pipeline.taillight_height,
    };
    let host_id = scene.host().id;

    let mut tracks: BTreeMap<LinkKey, Track> = BTreeMap::new();
    let mut pending: Option<(Measurements, Pose)> = None;
    let mut hv_valid: Option<HvPositionState> = None;
    let mut fv_prev: BTreeMap<u16, FvPositionEstimate> = BTreeMap::new();
    let mut out = PipelineOutput { frames: Vec::new(), fv: Vec::new() };

    for frame in 0..cfg.frame_count() {
        let time = frame as f64 * dt;

        // Estimation from the previous frame's measurements.
        let mut hv_status = if hv_valid.is_some() { HvStatus::Held } else { HvStatus::Unavailable };
        let mut fv_now: BTreeMap<u16, FvPositionEstimate> = BTreeMap::new();
        let mut measured_from = None;
        if let Some((m, pose)) = pending.take() {
            measured_from = Some(pose);
            let fresh = nearest_streetlight_pair(&m.streetlights).and_then(|(near, far)| {
                update_hv_position(hv_valid.as_ref(), &near, &far, cfg.camera_height)
                    .map(|s| (s, near, far))
            });
            if let Ok((state, near, far)) = fresh {
                let shape = pair_bearing_gap(&near, state.spacing, cfg.camera_height).map(|gap| {
                    curvature_check(near.bearing, far.bearing, gap, cfg.pipeline.curvature_tolerance)
                });
                match shape {
                    Ok(RoadShape::Straight) => {
                        hv_valid = Some(state);
                        hv_status = HvStatus::Fresh;
                    }
                    _ => hv_status = HvStatus::Curved,
                }
            }
            for obs in &m.vehicles {
                if let Ok(e) =
                    estimate_fv_position(hv_valid.as_ref(), obs, fv_prev.get(&obs.fv_id), &fv_settings)
                {
                    fv_now.insert(obs.fv_id, e);
                }
            }
        }
        for (id, e) in &fv_now {
            fv_prev.insert(*id, *e);
        }

        // Ground truth at this frame.
        let cam = camera_position(&scene);
        let host = *scene.host();
        let anchor_pos = hv_valid.and_then(|s| streetlight_road_position(&scene, s.anchor_sl));
        let hv_truth = anchor_pos.map(|(st, lat, _)| (host.station - st, host.lane_offset - lat));
        let hv_error = match (hv_valid, hv_truth) {
            (Some(s), Some((tx, ty))) => {
                let (ex, ey) = s.anchor_frame();
                Some((ex - tx).hypot(ey - ty))
            }
            _ => None,
        };
        for v in scene.vehicles.iter().filter(|v| v.id != host_id) {
            let mid = v.taillight_midpoint(&scene.road);
            let true_range = cam.distance(&mid);
            let estimate = fv_now.get(&v.id).copied();
            let true_world = anchor_pos.map(|(st, lat, _)| (v.station - st, v.lane_offset - lat));
            let world_error = match (estimate.and_then(|e| e.world_estimate), true_world) {
                (Some(w), Some((tx, ty))) => Some((w.x - tx).hypot(w.y - ty)),
                _ => None,
            };
            let position_error = estimate.zip(measured_from).map(|(e, pose)| {
                let (f, l) = (pose.forward(), pose.left());
                let x = pose.position.x + f.0 * e.relative.x + l.0 * e.relative.y;
                let y = pose.position.y + f.1 * e.relative.x + l.1 * e.relative.y;
                (x - mid.x).hypot(y - mid.y)
            });
            out.fv.push(FvRecord {
                frame,
                time,
                fv_id: v.id,
                estimate,
                true_range,
                range_error: estimate.map(|e| (e.range - true_range).abs()),
                true_world: if estimate.is_some_and(|e| e.anchored()) { true_world } else { None },
                world_error,
                position_error,
                true_collision: true_range < cfg.pipeline.collision_threshold,
            });
        }

        // Sensing.
        let visible = scene.visible_beacons(cfg.pipeline.fov, cfg.pipeline.max_range);
        let imaged = imager.image(&scene, &visible);
        let by_key: BTreeMap<BeaconKey, &Imaged> = imaged.iter().map(|i| (i.key, i)).collect();
        let mut links: Vec<LinkKey> = imaged.iter().map(|i| LinkKey::of(i.key)).collect();
        links.dedup();
        links.sort();
        links.dedup();
        tracks.retain(|k, _| links.contains(k));

        let mut m = Measurements::default();
        for link in links {
            let Some(truth_id) = transmitted_id(&scene, link) else { continue };
            let track = match tracks.get_mut(&link) {
                Some(t) => t,
                None => {
                    let tx = BeaconTransmitter::new(
                        &truth_id,
                        packet_phase(cfg.rng_seed, link),
                        cfg.pipeline.cycles_per_bit,
                    )?;
                    tracks.entry(link).or_insert(Track {
                        tx,
                        rx: PacketReceiver::new(),
                        decoded: None,
                        last_frame: None,
                    })
                }
            };
            let lamps: Option<(&Imaged, &Imaged)> = match link {
                LinkKey::Streetlight(id) => {
                    by_key.get(&BeaconKey::Streetlight(id)).map(|i| (*i, *i))
                }
                LinkKey::Vehicle(id) => {
                    let l = by_key.get(&BeaconKey::Taillight { vehicle: id, side: Side::Left });
                    let r = by_key.get(&BeaconKey::Taillight { vehicle: id, side: Side::Right });
                    l.zip(r).map(|(l, r)| (*l, *r))
                }
            };
            if let Some((a, b)) = lamps {
                if track.last_frame.is_some_and(|f| f + 1 != frame) {
                    track.rx.reset();
                }
                track.last_frame = Some(frame);
                let (s1, s2) = track.tx.states(frame);
                let sample = crate::occ::S2pskFrameSample {
                    s1: flip(s1, a.p_flip, &mut rng),
                    s2: flip(s2, b.p_flip, &mut rng),
                    sample_time: time,
                };
                if let RxEvent::Decoded(id) = track.rx.push(track.tx.chip_index(frame), &sample) {
                    track.decoded = Some(id);
                }
            }
            let Some(id) = track.decoded else { continue };
            match (link, id.payload) {
                (LinkKey::Streetlight(_), BeaconPayload::Streetlight { .. }) => {
                    if let Some((a, _)) = lamps {
                        if let Some(r) = measure(a, id, cfg.pipeline.streetlight_panel_area, &intr, time) {
                            m.streetlights.push(r);
                        }
                    }
                }
                (LinkKey::Vehicle(vid), BeaconPayload::Vehicle { panel_area, .. }) => {
                    let lamp = |side| by_key.get(&BeaconKey::Taillight { vehicle: vid, side });
                    let ml = lamp(Side::Left).and_then(|i| measure(i, id, panel_area, &intr, time));
                    let mr = lamp(Side::Right).and_then(|i| measure(i, id, panel_area, &intr, time));
                    match (ml, mr) {
                        (Some(l), r) => m.vehicles.push(TaillightObservation { fv_id: id.id, left: l, right: r }),
                        (None, Some(r)) => m.vehicles.push(TaillightObservation { fv_id: id.id, left: r, right: None }),
                        (None, None) => {}
                    }
                }
                _ => {}
            }
        }

        out.frames.push(FrameRecord {
            frame,
            time,
            hv: hv_valid,
            hv_status,
            hv_truth,
            hv_error,
            hv_reference: nearest_lamp_ahead(&scene),
            visible: visible.len(),
            decoded: tracks.values().filter(|t| t.decoded.is_some()).count(),
            measured: m.streetlights.len() + 2 * m.vehicles.len(),
        });
        pending = Some((m, scene.camera_pose()));
        scene = scene.step(dt);
    }
    Ok(out)
}
