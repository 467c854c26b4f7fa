use serde::{Deserialize, Serialize};

/// Coordinate frame a cloud is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Frame {
    Sensor,
    #[default]
    Ego,
}

/// One lidar return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: f64,
    /// Vertical channel the return came from.
    pub ring: u32,
}

impl LidarPoint {
    pub fn new(x: f64, y: f64, z: f64, intensity: f64, ring: u32) -> Self {
        LidarPoint {
            x,
            y,
            z,
            intensity,
            ring,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.intensity.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<LidarPoint>,
    pub frame: Frame,
}

impl PointCloud {
    pub fn new(points: Vec<LidarPoint>, frame: Frame) -> Self {
        PointCloud { points, frame }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LidarPoint> {
        self.points.iter()
    }
}

impl FromIterator<LidarPoint> for PointCloud {
    fn from_iter<I: IntoIterator<Item = LidarPoint>>(iter: I) -> Self {
        PointCloud::new(iter.into_iter().collect(), Frame::Ego)
    }
}
