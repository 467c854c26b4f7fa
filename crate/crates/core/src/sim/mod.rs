//! Miniature lidar simulator producing synthetic training samples: a sparse
//! measurement cloud and a dense evidential label grid.

mod labels;
mod lidar;
mod scene;

use thiserror::Error;

use crate::evidence::EvidenceError;
use crate::grid::GridError;

pub use labels::{
    apply_dynamic_masses, beam_counts, deposit_reflections, generate_synthetic_sample, BeamSource, LabelConfig,
    SyntheticSample,
};
pub use lidar::{apply_sensor_noise, cast_ray, cast_rays, hits_to_cloud, LidarConfig, RayHit, SensorPose};
pub use scene::{DynamicObject, GroundPatch, Material, Scene, SolidBox};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid lidar configuration: {0}")]
    InvalidConfig(String),
    #[error("measurement and label sensors must share mount pose and vertical field of view")]
    SensorMismatch,
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
