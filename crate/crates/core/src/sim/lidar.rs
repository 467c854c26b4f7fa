//! Deterministic ray casting against planar patches and boxes.

use nalgebra::{Point3, Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::{Material, Scene, SolidBox};
use super::SimError;
use crate::cloud::{Frame, LidarPoint, PointCloud};

/// Hits closer than this to the ray origin are ignored.
const MIN_RANGE: f64 = 1e-6;

/// Sensor mounting pose in the ego frame. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorPose {
    pub position: [f64; 3],
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl SensorPose {
    pub fn at(x: f64, y: f64, z: f64) -> Self {
        SensorPose {
            position: [x, y, z],
            ..Default::default()
        }
    }

    fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.roll, self.pitch, self.yaw)
    }
}

/// A spinning multi-layer lidar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarConfig {
    pub layers: u32,
    pub azimuth_steps: u32,
    /// Lowest and highest layer elevation, radians.
    pub vertical_fov: (f64, f64),
    pub mount: SensorPose,
    pub max_range: f64,
    /// Probability of silently losing a return. Off by default.
    #[serde(default)]
    pub dropout_probability: f64,
    /// Standard deviation of Gaussian range noise, meters. Off by default.
    #[serde(default)]
    pub range_noise_std: f64,
}

impl LidarConfig {
    /// 32 layers by 900 azimuth steps.
    pub fn sparse(mount: SensorPose, vertical_fov: (f64, f64), max_range: f64) -> Self {
        LidarConfig {
            layers: 32,
            azimuth_steps: 900,
            vertical_fov,
            mount,
            max_range,
            dropout_probability: 0.0,
            range_noise_std: 0.0,
        }
    }

    /// 3000 layers by 900 azimuth steps, for label generation.
    pub fn dense(mount: SensorPose, vertical_fov: (f64, f64), max_range: f64) -> Self {
        LidarConfig {
            layers: 3000,
            ..Self::sparse(mount, vertical_fov, max_range)
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if self.layers == 0 {
            return bad("layers must be at least 1");
        }
        if self.azimuth_steps == 0 {
            return bad("azimuth_steps must be at least 1");
        }
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return bad("max_range must be positive");
        }
        let (lo, hi) = self.vertical_fov;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad("vertical_fov must be an ordered pair of finite angles");
        }
        if !(0.0..=1.0).contains(&self.dropout_probability) {
            return bad("dropout_probability must lie in [0, 1]");
        }
        if !(self.range_noise_std.is_finite() && self.range_noise_std >= 0.0) {
            return bad("range_noise_std must be non-negative");
        }
        Ok(())
    }

    /// Elevation of a layer; layers are spread uniformly across the field of view.
    pub fn elevation(&self, layer: u32) -> f64 {
        let (lo, hi) = self.vertical_fov;
        if self.layers == 1 {
            (lo + hi) / 2.0
        } else {
            lo + (hi - lo) * layer as f64 / (self.layers - 1) as f64
        }
    }

    pub fn azimuth(&self, step: u32) -> f64 {
        std::f64::consts::TAU * step as f64 / self.azimuth_steps as f64
    }

    /// Unit beam direction in the ego frame.
    pub fn direction(&self, layer: u32, step: u32) -> Vector3<f64> {
        let el = self.elevation(layer);
        let az = self.azimuth(step);
        let local = Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin());
        self.mount.rotation() * local
    }

    pub fn origin(&self) -> Point3<f64> {
        Point3::from(self.mount.position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayHit {
    pub point: [f64; 3],
    pub range: f64,
    pub material: Material,
    pub object_id: Option<u32>,
    pub layer: u32,
    pub azimuth_step: u32,
}

/// Parametric range at which a ray enters a box, if it does so in front of
/// the origin.
fn intersect_box(origin: &Point3<f64>, dir: &Vector3<f64>, solid: &SolidBox) -> Option<f64> {
    let fp = &solid.footprint;
    let (s, c) = fp.yaw.sin_cos();
    let ox = origin.x - fp.center.0;
    let oy = origin.y - fp.center.1;
    let o = [c * ox + s * oy, -s * ox + c * oy, origin.z - solid.base_z];
    let d = [c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z];
    let lo = [-fp.length / 2.0, -fp.width / 2.0, 0.0];
    let hi = [fp.length / 2.0, fp.width / 2.0, solid.height];

    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..3 {
        if d[axis] == 0.0 {
            if o[axis] < lo[axis] || o[axis] > hi[axis] {
                return None;
            }
            continue;
        }
        let t0 = (lo[axis] - o[axis]) / d[axis];
        let t1 = (hi[axis] - o[axis]) / d[axis];
        let (t0, t1) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
        t_near = t_near.max(t0);
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    (t_near > MIN_RANGE).then_some(t_near)
}

fn intersect_patch(origin: &Point3<f64>, dir: &Vector3<f64>, patch: &super::scene::GroundPatch) -> Option<f64> {
    let (sx, sy) = patch.slope;
    let denom = dir.z - sx * dir.x - sy * dir.y;
    if denom == 0.0 {
        return None;
    }
    let t = (patch.height + sx * origin.x + sy * origin.y - origin.z) / denom;
    if t <= MIN_RANGE || !t.is_finite() {
        return None;
    }
    let x = origin.x + t * dir.x;
    let y = origin.y + t * dir.y;
    patch.contains_xy(x, y).then_some(t)
}

/// Casts a single ray and reports the nearest surface within `max_range`.
pub fn cast_ray(
    scene: &Scene,
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    max_range: f64,
) -> Option<(f64, Material, Option<u32>)> {
    let mut best: Option<(f64, Material, Option<u32>)> = None;
    let mut consider = |t: Option<f64>, material: Material, id: Option<u32>| {
        if let Some(t) = t {
            if t <= max_range && best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, material, id));
            }
        }
    };
    for patch in &scene.ground {
        consider(intersect_patch(origin, dir, patch), patch.material, None);
    }
    for solid in &scene.static_boxes {
        consider(intersect_box(origin, dir, solid), Material::NonDrivable, None);
    }
    for obj in &scene.dynamic_boxes {
        consider(
            intersect_box(origin, dir, &obj.solid),
            Material::DynamicObject,
            Some(obj.id),
        );
    }
    best
}

/// One ray per `(layer, azimuth)` pair. Hits come back ordered layer-major,
/// then by azimuth step, independent of thread scheduling.
pub fn cast_rays(scene: &Scene, config: &LidarConfig) -> Vec<RayHit> {
    let origin = config.origin();
    (0..config.layers)
        .into_par_iter()
        .flat_map_iter(|layer| {
            (0..config.azimuth_steps).filter_map(move |step| {
                let dir = config.direction(layer, step);
                cast_ray(scene, &origin, &dir, config.max_range).map(|(range, material, object_id)| {
                    let p = origin + dir * range;
                    RayHit {
                        point: [p.x, p.y, p.z],
                        range,
                        material,
                        object_id,
                        layer,
                        azimuth_step: step,
                    }
                })
            })
        })
        .collect()
}

/// Applies the configured dropout and range noise, consuming the RNG in hit
/// order. Does nothing (and draws nothing) when both are off.
pub fn apply_sensor_noise<R: Rng>(hits: &mut Vec<RayHit>, config: &LidarConfig, rng: &mut R) {
    if config.dropout_probability > 0.0 {
        hits.retain(|_| !rng.random_bool(config.dropout_probability));
    }
    if config.range_noise_std > 0.0 {
        let noise = Normal::new(0.0, config.range_noise_std).expect("validated std");
        let origin = config.origin();
        for hit in hits.iter_mut() {
            let p = Point3::from(hit.point);
            let dir = (p - origin) / hit.range;
            let range = (hit.range + noise.sample(rng)).max(MIN_RANGE);
            let q = origin + dir * range;
            hit.point = [q.x, q.y, q.z];
            hit.range = range;
        }
    }
}

/// Measurement point cloud in the ego frame; `ring` is the layer index.
pub fn hits_to_cloud(hits: &[RayHit]) -> PointCloud {
    PointCloud::new(
        hits.iter()
            .map(|h| LidarPoint::new(h.point[0], h.point[1], h.point[2], h.material.intensity(), h.layer))
            .collect(),
        Frame::Ego,
    )
}
