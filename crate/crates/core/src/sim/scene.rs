use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::footprint::BevRect;

/// Surface class of whatever reflected a beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    /// Legally drivable surface: asphalt, road markings.
    Drivable,
    /// Sidewalks, buildings, poles and other static structure.
    NonDrivable,
    DynamicObject,
}

impl Material {
    /// Intensity reported for a return off this material.
    pub fn intensity(self) -> f64 {
        match self {
            Material::Drivable => 0.2,
            Material::NonDrivable => 0.5,
            Material::DynamicObject => 0.8,
        }
    }
}

/// A planar ground polygon, `z = height + slope.0 * x + slope.1 * y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundPatch {
    pub polygon: Vec<(f64, f64)>,
    pub height: f64,
    pub slope: (f64, f64),
    pub material: Material,
}

impl GroundPatch {
    pub fn flat(polygon: Vec<(f64, f64)>, height: f64, material: Material) -> Self {
        GroundPatch {
            polygon,
            height,
            slope: (0.0, 0.0),
            material,
        }
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]` at constant height.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, height: f64, material: Material) -> Self {
        Self::flat(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)], height, material)
    }

    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        self.height + self.slope.0 * x + self.slope.1 * y
    }

    /// Even-odd point-in-polygon test.
    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        let pts = &self.polygon;
        let mut inside = false;
        let mut j = pts.len() - 1;
        for i in 0..pts.len() {
            let (xi, yi) = pts[i];
            let (xj, yj) = pts[j];
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

/// A box standing on the ground, rotated about the vertical axis only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolidBox {
    pub footprint: BevRect,
    /// Height of the bottom face.
    pub base_z: f64,
    pub height: f64,
}

impl SolidBox {
    pub fn new(center: (f64, f64), length: f64, width: f64, yaw: f64, base_z: f64, height: f64) -> Self {
        SolidBox {
            footprint: BevRect::new(center, length, width, yaw),
            base_z,
            height,
        }
    }

    pub fn has_positive_extent(&self) -> bool {
        self.footprint.has_positive_extent() && self.height > 0.0 && self.height.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicObject {
    pub id: u32,
    pub solid: SolidBox,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scene {
    pub ground: Vec<GroundPatch>,
    /// Static obstacles; always [`Material::NonDrivable`].
    pub static_boxes: Vec<SolidBox>,
    /// Movable objects; always [`Material::DynamicObject`].
    pub dynamic_boxes: Vec<DynamicObject>,
}

impl Scene {
    pub fn validate(&self) -> Result<(), SimError> {
        for (i, patch) in self.ground.iter().enumerate() {
            if patch.polygon.len() < 3 {
                return Err(SimError::InvalidScene(format!(
                    "ground patch {i} needs at least 3 vertices"
                )));
            }
        }
        for (i, b) in self.static_boxes.iter().enumerate() {
            if !b.has_positive_extent() {
                return Err(SimError::InvalidScene(format!(
                    "static box {i} has a non-positive extent"
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for obj in &self.dynamic_boxes {
            if !obj.solid.has_positive_extent() {
                return Err(SimError::InvalidScene(format!(
                    "dynamic object {} has a non-positive extent",
                    obj.id
                )));
            }
            if !ids.insert(obj.id) {
                return Err(SimError::InvalidScene(format!(
                    "duplicate dynamic object id {}",
                    obj.id
                )));
            }
        }
        Ok(())
    }

    /// The same scene with every dynamic object removed.
    pub fn without_dynamic(&self) -> Scene {
        Scene {
            dynamic_boxes: Vec::new(),
            ..self.clone()
        }
    }
}
