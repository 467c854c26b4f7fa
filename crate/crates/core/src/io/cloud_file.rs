use std::path::Path;

use byteorder::{WriteBytesExt, LE};

use super::{read_file, write_atomic, FormatError, Reader, FORMAT_VERSION};
use crate::cloud::{Frame, LidarPoint, PointCloud};

pub const CLOUD_MAGIC: [u8; 4] = *b"EPCL";
const RECORD_LEN: usize = 20;
// Largest ring index that survives the trip through an f32.
const MAX_RING: u32 = 1 << 24;

/// Serializes a cloud. Coordinates and intensity are narrowed to `f32`.
pub fn encode_cloud(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(14 + cloud.len() * RECORD_LEN);
    out.extend_from_slice(&CLOUD_MAGIC);
    out.write_u16::<LE>(FORMAT_VERSION).unwrap();
    out.write_u64::<LE>(cloud.len() as u64).unwrap();
    for p in cloud.iter() {
        for v in [p.x as f32, p.y as f32, p.z as f32, p.intensity as f32, p.ring as f32] {
            out.write_f32::<LE>(v).unwrap();
        }
    }
    out
}

pub fn decode_cloud(bytes: &[u8]) -> Result<PointCloud, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(CLOUD_MAGIC)?;
    r.version()?;
    let count = r.u64()?;
    let payload = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(RECORD_LEN))
        .ok_or_else(|| FormatError::Invalid(format!("point count {count} too large")))?;
    r.expect_remaining(payload)?;

    let mut points = Vec::with_capacity(count as usize);
    for i in 0..count {
        let [x, y, z, intensity, ring] = [r.f32()?, r.f32()?, r.f32()?, r.f32()?, r.f32()?];
        let p = LidarPoint::new(x as f64, y as f64, z as f64, intensity as f64, 0);
        if !p.is_finite() {
            return Err(FormatError::Invalid(format!("point {i} is not finite")));
        }
        if !(ring >= 0.0 && ring.fract() == 0.0 && (ring as u32) < MAX_RING) {
            return Err(FormatError::Invalid(format!("point {i}: ring {ring} is not an index")));
        }
        points.push(LidarPoint { ring: ring as u32, ..p });
    }
    Ok(PointCloud::new(points, Frame::Ego))
}

pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<(), FormatError> {
    write_atomic(path, &encode_cloud(cloud))
}

pub fn read_cloud(path: &Path) -> Result<PointCloud, FormatError> {
    decode_cloud(&read_file(path)?)
}
