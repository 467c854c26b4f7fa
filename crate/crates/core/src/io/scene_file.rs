//! TOML scene description consumed by `gen-synthetic`.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{read_file, FormatError};
use crate::grid::GridSpec;
use crate::sim::{DynamicObject, GroundPatch, LabelConfig, LidarConfig, Material, Scene, SensorPose, SolidBox};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default)]
    pub grid: GridSection,
    pub sensor: SensorSection,
    #[serde(default = "LidarSection::sparse")]
    pub sparse: LidarSection,
    #[serde(default = "LidarSection::dense")]
    pub dense: LidarSection,
    #[serde(default)]
    pub labels: LabelConfig,
    #[serde(default)]
    pub variation: Variation,
    #[serde(default)]
    pub ground: Vec<GroundSection>,
    #[serde(default)]
    pub static_box: Vec<BoxSection>,
    #[serde(default)]
    pub dynamic_box: Vec<DynamicBoxSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length_m: f64,
    pub width_m: f64,
    pub cell_size_m: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let s = GridSpec::default();
        GridSection {
            length_m: s.length_m(),
            width_m: s.width_m(),
            cell_size_m: s.cell_size(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSection {
    pub position: [f64; 3],
    /// Roll, pitch, yaw in degrees.
    #[serde(default)]
    pub rotation_deg: [f64; 3],
    /// Lowest and highest beam elevation in degrees.
    pub vertical_fov_deg: [f64; 2],
    pub max_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LidarSection {
    pub layers: u32,
    #[serde(default = "default_azimuth_steps")]
    pub azimuth_steps: u32,
    #[serde(default)]
    pub dropout_probability: f64,
    #[serde(default)]
    pub range_noise_std: f64,
}

fn default_azimuth_steps() -> u32 {
    900
}

impl LidarSection {
    fn sparse() -> Self {
        LidarSection {
            layers: 32,
            azimuth_steps: default_azimuth_steps(),
            dropout_probability: 0.0,
            range_noise_std: 0.0,
        }
    }

    fn dense() -> Self {
        LidarSection {
            layers: 3000,
            ..Self::sparse()
        }
    }
}

/// Per-sample randomization of dynamic objects.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variation {
    /// Objects move by up to this much along x and y, uniformly.
    #[serde(default)]
    pub object_jitter_m: f64,
    /// Objects turn by up to this many degrees, uniformly.
    #[serde(default)]
    pub object_yaw_jitter_deg: f64,
}

impl Variation {
    /// A copy of `scene` with each dynamic object perturbed. Static content is
    /// untouched; with zero jitter the scene is returned unchanged and no
    /// randomness is drawn.
    pub fn apply<R: Rng>(&self, scene: &Scene, rng: &mut R) -> Scene {
        let mut out = scene.clone();
        if self.object_jitter_m <= 0.0 && self.object_yaw_jitter_deg <= 0.0 {
            return out;
        }
        let mut draw = |half: f64| {
            if half > 0.0 {
                rng.random_range(-half..=half)
            } else {
                0.0
            }
        };
        for obj in &mut out.dynamic_boxes {
            let f = &mut obj.solid.footprint;
            f.center.0 += draw(self.object_jitter_m);
            f.center.1 += draw(self.object_jitter_m);
            f.yaw += draw(self.object_yaw_jitter_deg).to_radians();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSection {
    pub polygon: Vec<[f64; 2]>,
    #[serde(default)]
    pub height: f64,
    /// Height change per meter along x and y.
    #[serde(default)]
    pub slope: [f64; 2],
    pub material: Material,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub center: [f64; 2],
    pub length: f64,
    pub width: f64,
    #[serde(default)]
    pub yaw_deg: f64,
    #[serde(default)]
    pub base_z: f64,
    pub height: f64,
}

impl BoxSection {
    fn solid(&self) -> SolidBox {
        SolidBox::new(
            (self.center[0], self.center[1]),
            self.length,
            self.width,
            self.yaw_deg.to_radians(),
            self.base_z,
            self.height,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicBoxSection {
    pub id: u32,
    pub center: [f64; 2],
    pub length: f64,
    pub width: f64,
    #[serde(default)]
    pub yaw_deg: f64,
    #[serde(default)]
    pub base_z: f64,
    pub height: f64,
}

impl DynamicBoxSection {
    fn geometry(&self) -> BoxSection {
        BoxSection {
            center: self.center,
            length: self.length,
            width: self.width,
            yaw_deg: self.yaw_deg,
            base_z: self.base_z,
            height: self.height,
        }
    }
}

/// A scene file resolved into simulator inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSetup {
    pub scene: Scene,
    pub sparse: LidarConfig,
    pub dense: LidarConfig,
    pub spec: GridSpec,
    pub labels: LabelConfig,
    pub variation: Variation,
}

impl SceneFile {
    pub fn resolve(&self) -> Result<SceneSetup, FormatError> {
        let invalid = |e: &dyn std::fmt::Display| FormatError::Invalid(e.to_string());
        let spec =
            GridSpec::new(self.grid.length_m, self.grid.width_m, self.grid.cell_size_m).map_err(|e| invalid(&e))?;
        let [roll, pitch, yaw] = self.sensor.rotation_deg.map(f64::to_radians);
        let mount = SensorPose {
            position: self.sensor.position,
            roll,
            pitch,
            yaw,
        };
        let fov = (
            self.sensor.vertical_fov_deg[0].to_radians(),
            self.sensor.vertical_fov_deg[1].to_radians(),
        );
        let lidar = |s: &LidarSection| LidarConfig {
            layers: s.layers,
            azimuth_steps: s.azimuth_steps,
            vertical_fov: fov,
            mount,
            max_range: self.sensor.max_range,
            dropout_probability: s.dropout_probability,
            range_noise_std: s.range_noise_std,
        };
        let scene = Scene {
            ground: self
                .ground
                .iter()
                .map(|g| GroundPatch {
                    polygon: g.polygon.iter().map(|p| (p[0], p[1])).collect(),
                    height: g.height,
                    slope: (g.slope[0], g.slope[1]),
                    material: g.material,
                })
                .collect(),
            static_boxes: self.static_box.iter().map(BoxSection::solid).collect(),
            dynamic_boxes: self
                .dynamic_box
                .iter()
                .map(|d| DynamicObject {
                    id: d.id,
                    solid: d.geometry().solid(),
                })
                .collect(),
        };
        let setup = SceneSetup {
            scene,
            sparse: lidar(&self.sparse),
            dense: lidar(&self.dense),
            spec,
            labels: self.labels.clone(),
            variation: self.variation,
        };
        setup.scene.validate().map_err(|e| invalid(&e))?;
        setup.sparse.validate().map_err(|e| invalid(&e))?;
        setup.dense.validate().map_err(|e| invalid(&e))?;
        let v = &setup.variation;
        if !(v.object_jitter_m >= 0.0 && v.object_yaw_jitter_deg >= 0.0) {
            return Err(FormatError::Invalid("variation ranges must be non-negative".into()));
        }
        Ok(setup)
    }
}

pub fn parse_scene(text: &str) -> Result<SceneSetup, FormatError> {
    toml::from_str::<SceneFile>(text)?.resolve()
}

pub fn read_scene(path: &Path) -> Result<SceneSetup, FormatError> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|_| FormatError::Invalid(format!("{}: not UTF-8", path.display())))?;
    parse_scene(&text)
}
