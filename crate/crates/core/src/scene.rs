//! World model: road, streetlights and vehicles stepped in discrete time.
//!
//! The road frame is right-handed with `x` along the road at station zero,
//! `y` lateral (left positive) and `z` up. Vehicles live in the `z = 0`
//! plane and are addressed by road station (arc length) plus a lateral
//! offset from the road centerline; only beacon mounting heights leave the
//! ground plane. A non-zero curvature bends the road into a constant-radius
//! arc turning left for positive curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kilometres per hour to metres per second.
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

pub fn ms_to_kmh(ms: f64) -> f64 {
    ms * 3.6
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorldPoint {
    pub const ORIGIN: WorldPoint = WorldPoint { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_vector(self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: nalgebra::Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn distance(&self, other: &WorldPoint) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }

    pub fn planar_distance(&self, other: &WorldPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangular LED emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedPanelSpec {
    /// metres
    pub width: f64,
    /// metres
    pub height: f64,
    /// watts
    pub emitted_optical_power: f64,
    pub lambertian_order: f64,
}

impl Default for LedPanelSpec {
    /// 10 x 10 cm panel, 1 W, first-order Lambertian.
    fn default() -> Self {
        Self {
            width: 0.10,
            height: 0.10,
            emitted_optical_power: 1.0,
            lambertian_order: 1.0,
        }
    }
}

impl LedPanelSpec {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::Config(format!(
                "LED panel dimensions must be positive, got {} x {}",
                self.width, self.height
            )));
        }
        if !(self.emitted_optical_power > 0.0) {
            return Err(Error::Config("LED panel optical power must be positive".into()));
        }
        if self.lambertian_order < 0.0 {
            return Err(Error::Config("Lambertian order must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreetlightSpec {
    pub id: u16,
    /// Foot of the pole.
    pub base: WorldPoint,
    /// Height of the lamp panel above `base`.
    pub lamp_height: f64,
    /// Distance along the road to the next streetlight.
    pub spacing_to_next: f64,
    /// Road station of the pole, used to orient the panel toward oncoming traffic.
    pub station: f64,
    pub panel: LedPanelSpec,
}

impl StreetlightSpec {
    pub fn lamp(&self) -> WorldPoint {
        WorldPoint::new(self.base.x, self.base.y, self.base.z + self.lamp_height)
    }
}

/// Regularly spaced streetlight row along one side of the road.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreetlightRow {
    pub first_id: u16,
    pub count: usize,
    pub first_station: f64,
    pub spacing: f64,
    /// Lateral offset of the pole line from the road centerline (left positive).
    pub lateral_offset: f64,
    pub lamp_height: f64,
    pub panel: LedPanelSpec,
}

impl Default for StreetlightRow {
    fn default() -> Self {
        Self {
            first_id: 1,
            count: 40,
            first_station: 0.0,
            spacing: 25.0,
            lateral_offset: 10.0,
            lamp_height: 7.0,
            panel: LedPanelSpec::default(),
        }
    }
}

impl StreetlightRow {
    pub fn generate(&self, road: &Road) -> Vec<StreetlightSpec> {
        (0..self.count)
            .map(|n| {
                let station = self.first_station + n as f64 * self.spacing;
                let (base, _) = road.to_world(station, self.lateral_offset);
                StreetlightSpec {
                    id: self.first_id + n as u16,
                    base,
                    lamp_height: self.lamp_height,
                    spacing_to_next: self.spacing,
                    station,
                    panel: self.panel,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaillightPair {
    pub panel: LedPanelSpec,
    /// Centre-to-centre lateral distance between the two lamps.
    pub separation: f64,
    pub mount_height: f64,
}

impl Default for TaillightPair {
    fn default() -> Self {
        Self {
            panel: LedPanelSpec::default(),
            separation: 1.5,
            mount_height: 1.0,
        }
    }
}

/// Which lamp of a taillight pair, as seen from behind the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub id: u16,
    pub is_host: bool,
    /// Arc length along the road of the vehicle's rear axle plane.
    pub station: f64,
    /// Lateral offset of the vehicle centerline from the road centerline.
    pub lane_offset: f64,
    /// metres / second
    pub speed: f64,
    pub taillights: TaillightPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: WorldPoint,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
}

impl Pose {
    pub fn forward(&self) -> (f64, f64) {
        (self.heading.cos(), self.heading.sin())
    }

    pub fn left(&self) -> (f64, f64) {
        (-self.heading.sin(), self.heading.cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Road {
    /// Signed curvature in 1/m; zero is a straight road.
    pub curvature: f64,
}

impl Road {
    pub fn straight() -> Self {
        Self { curvature: 0.0 }
    }

    /// Road coordinates (station, lateral offset) to a ground point and the
    /// local tangent heading.
    pub fn to_world(&self, station: f64, offset: f64) -> (WorldPoint, f64) {
        if self.curvature == 0.0 {
            return (WorldPoint::new(station, offset, 0.0), 0.0);
        }
        let radius = 1.0 / self.curvature;
        let psi = station * self.curvature;
        let r = radius - offset;
        (
            WorldPoint::new(r * psi.sin(), radius - r * psi.cos(), 0.0),
            psi,
        )
    }
}

impl VehicleSpec {
    pub fn pose(&self, road: &Road) -> Pose {
        let (position, heading) = road.to_world(self.station, self.lane_offset);
        Pose { position, heading }
    }

    /// Centre of one taillight lamp in world coordinates.
    pub fn taillight(&self, road: &Road, side: Side) -> WorldPoint {
        let half = self.taillights.separation / 2.0;
        // Viewed from behind, the left lamp sits on the vehicle's left.
        let offset = match side {
            Side::Left => self.lane_offset + half,
            Side::Right => self.lane_offset - half,
        };
        let (p, _) = road.to_world(self.station, offset);
        WorldPoint::new(p.x, p.y, self.taillights.mount_height)
    }

    pub fn taillight_midpoint(&self, road: &Road) -> WorldPoint {
        let (p, _) = road.to_world(self.station, self.lane_offset);
        WorldPoint::new(p.x, p.y, self.taillights.mount_height)
    }
}

/// Identifies a physical emitter in the scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BeaconKey {
    Streetlight(u16),
    Taillight { vehicle: u16, side: Side },
}

impl std::fmt::Display for BeaconKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BeaconKey::Streetlight(id) => write!(f, "SL{id}"),
            BeaconKey::Taillight { vehicle, side } => {
                let s = match side {
                    Side::Left => "L",
                    Side::Right => "R",
                };
                write!(f, "FV{vehicle}{s}")
            }
        }
    }
}

/// A beacon inside the host camera's view cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibleBeacon {
    pub key: BeaconKey,
    pub center: WorldPoint,
    pub panel: LedPanelSpec,
    /// Camera-to-panel straight-line distance.
    pub direct_distance: f64,
    /// Angle between the camera axis and the line of sight.
    pub incidence: f64,
    /// Angle between the panel normal and the line of sight.
    pub irradiation: f64,
    /// Signed horizontal angle from the camera axis, right positive.
    pub bearing: f64,
}

/// Snapshot of the scene at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneState {
    pub time: f64,
    pub road: Road,
    pub streetlights: Vec<StreetlightSpec>,
    pub vehicles: Vec<VehicleSpec>,
    /// Camera height above the host's ground point.
    pub camera_height: f64,
}

impl SceneState {
    pub fn new(
        road: Road,
        streetlights: Vec<StreetlightSpec>,
        vehicles: Vec<VehicleSpec>,
        camera_height: f64,
    ) -> Result<Self> {
        let hosts = vehicles.iter().filter(|v| v.is_host).count();
        if hosts != 1 {
            return Err(Error::Config(format!(
                "vehicles: exactly one host vehicle required, found {hosts}"
            )));
        }
        if vehicles.iter().any(|v| !(v.speed >= 0.0)) {
            return Err(Error::Config("vehicles: speed must be non-negative".into()));
        }
        for pair in streetlights.windows(2) {
            if pair[1].id <= pair[0].id {
                return Err(Error::Config(
                    "streetlights: ids must be strictly increasing along the road".into(),
                ));
            }
        }
        for sl in &streetlights {
            if !(sl.lamp_height > 0.0 && sl.spacing_to_next > 0.0) {
                return Err(Error::Config(format!(
                    "streetlight {}: lamp height and spacing must be positive",
                    sl.id
                )));
            }
            sl.panel.validate()?;
        }
        Ok(Self {
            time: 0.0,
            road,
            streetlights,
            vehicles,
            camera_height,
        })
    }

    pub fn host(&self) -> &VehicleSpec {
        self.vehicles
            .iter()
            .find(|v| v.is_host)
            .expect("scene validated with one host")
    }

    pub fn vehicle(&self, id: u16) -> Option<&VehicleSpec> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn streetlight(&self, id: u16) -> Option<&StreetlightSpec> {
        self.streetlights.iter().find(|s| s.id == id)
    }

    pub fn host_pose(&self) -> Pose {
        self.host().pose(&self.road)
    }

    /// Host camera centre and heading.
    pub fn camera_pose(&self) -> Pose {
        let mut pose = self.host_pose();
        pose.position.z += self.camera_height;
        pose
    }

    /// Advances every vehicle by `speed * dt` along its lane.
    pub fn step(&self, dt: f64) -> SceneState {
        debug_assert!(dt > 0.0);
        self.advance(dt)
    }

    /// State at `time + dt` for any `dt` (may be negative for sub-frame
    /// look-back during an exposure).
    pub fn advance(&self, dt: f64) -> SceneState {
        let mut next = self.clone();
        next.time += dt;
        for v in &mut next.vehicles {
            v.station += v.speed * dt;
        }
        next
    }

    /// World position of a beacon's panel centre.
    pub fn beacon_center(&self, key: BeaconKey) -> Option<(WorldPoint, LedPanelSpec)> {
        match key {
            BeaconKey::Streetlight(id) => self.streetlight(id).map(|s| (s.lamp(), s.panel)),
            BeaconKey::Taillight { vehicle, side } => self
                .vehicle(vehicle)
                .map(|v| (v.taillight(&self.road, side), v.taillights.panel)),
        }
    }

    fn panel_normal(&self, key: BeaconKey) -> (f64, f64) {
        // Panels face back down the road toward following traffic.
        let heading = match key {
            BeaconKey::Streetlight(id) => {
                let s = self.streetlight(id).map(|s| s.station).unwrap_or(0.0);
                self.road.to_world(s, 0.0).1
            }
            BeaconKey::Taillight { vehicle, .. } => self
                .vehicle(vehicle)
                .map(|v| v.pose(&self.road).heading)
                .unwrap_or(0.0),
        };
        (-heading.cos(), -heading.sin())
    }

    fn all_beacons(&self) -> Vec<BeaconKey> {
        let host = self.host().id;
        let mut keys: Vec<BeaconKey> = self
            .streetlights
            .iter()
            .map(|s| BeaconKey::Streetlight(s.id))
            .collect();
        for v in self.vehicles.iter().filter(|v| v.id != host) {
            keys.push(BeaconKey::Taillight { vehicle: v.id, side: Side::Left });
            keys.push(BeaconKey::Taillight { vehicle: v.id, side: Side::Right });
        }
        keys
    }

    /// Every streetlight and taillight lamp ahead of the host camera, inside
    /// the horizontal field of view and within `max_range`.
    pub fn visible_beacons(&self, fov_horizontal: f64, max_range: f64) -> Vec<VisibleBeacon> {
        let cam = self.camera_pose();
        visible_from(self, &cam, fov_horizontal, max_range)
    }
}

/// Visibility test against an explicit camera pose.
pub fn visible_from(
    scene: &SceneState,
    cam: &Pose,
    fov_horizontal: f64,
    max_range: f64,
) -> Vec<VisibleBeacon> {
    let half_fov = fov_horizontal / 2.0;
    let (fx, fy) = cam.forward();
    let (lx, ly) = cam.left();
    let mut out = Vec::new();
    for key in scene.all_beacons() {
        let Some((center, panel)) = scene.beacon_center(key) else {
            continue;
        };
        let dx = center.x - cam.position.x;
        let dy = center.y - cam.position.y;
        let dz = center.z - cam.position.z;
        let forward = dx * fx + dy * fy;
        let left = dx * lx + dy * ly;
        if forward <= 0.0 {
            continue;
        }
        let bearing = (-left).atan2(forward);
        if bearing.abs() > half_fov {
            continue;
        }
        let d = (dx * dx + dy * dy + dz * dz).sqrt();
        if d > max_range {
            continue;
        }
        let incidence = (forward / d).clamp(-1.0, 1.0).acos();
        let (nx, ny) = scene.panel_normal(key);
        // Unit vector from the panel back to the camera.
        let cos_irr = (-dx * nx - dy * ny) / d;
        let irradiation = cos_irr.clamp(-1.0, 1.0).acos();
        out.push(VisibleBeacon {
            key,
            center,
            panel,
            direct_distance: d,
            incidence,
            irradiation,
            bearing,
        });
    }
    out
}
