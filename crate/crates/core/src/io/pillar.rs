use std::collections::BTreeMap;
use std::path::Path;

use byteorder::{WriteBytesExt, LE};

use super::{read_file, write_atomic, FormatError, Reader, FORMAT_VERSION};
use crate::cloud::{LidarPoint, PointCloud};
use crate::grid::GridSpec;

pub const PILLAR_MAGIC: [u8; 4] = *b"EPIL";
/// Per-point features: x, y, z, intensity, offsets to the pillar mean
/// (x, y, z) and offsets to the cell center (x, y).
pub const PILLAR_FEATURES: usize = 9;

/// Dense pillar encoding of one cloud, shape `(max_pillars, max_points, 9)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PillarTensor {
    pub rows: u32,
    pub cols: u32,
    pub max_pillars: u32,
    pub max_points: u32,
    /// Row-major `(pillar, point, feature)`, zero padded.
    pub features: Vec<f32>,
    /// Row-major grid cell index of each populated pillar, ascending.
    pub cell_indices: Vec<u32>,
}

impl PillarTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.max_pillars as usize, self.max_points as usize, PILLAR_FEATURES)
    }

    pub fn pillar_count(&self) -> usize {
        self.cell_indices.len()
    }

    pub fn feature(&self, pillar: usize, point: usize) -> &[f32] {
        let start = (pillar * self.max_points as usize + point) * PILLAR_FEATURES;
        &self.features[start..start + PILLAR_FEATURES]
    }

    fn validate(&self) -> Result<(), FormatError> {
        let (p, n, d) = self.shape();
        if p == 0 || n == 0 {
            return Err(FormatError::Invalid(
                "pillar and point limits must be at least 1".into(),
            ));
        }
        if self.features.len() != p * n * d {
            return Err(FormatError::Invalid(format!(
                "feature block has {} values, expected {}",
                self.features.len(),
                p * n * d
            )));
        }
        if self.cell_indices.len() > p {
            return Err(FormatError::Invalid("more pillars than the pillar limit".into()));
        }
        let cells = self.rows as u64 * self.cols as u64;
        if self.cell_indices.iter().any(|&i| i as u64 >= cells) {
            return Err(FormatError::Invalid("pillar cell index outside the grid".into()));
        }
        if self.cell_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FormatError::Invalid(
                "pillar cell indices must be strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

/// Buckets points into per-cell pillars and encodes them.
///
/// Points outside the grid are dropped. When there are more than
/// `max_pillars` non-empty cells, the most populated ones are kept (ties by
/// lower cell index); kept pillars are ordered by cell index. Within a
/// pillar the first `max_points` points in input order are kept, and the
/// pillar mean is taken over those.
///
/// # Panics
/// If `max_pillars` or `max_points` is zero.
pub fn pillarize(cloud: &PointCloud, spec: &GridSpec, max_pillars: usize, max_points: usize) -> PillarTensor {
    assert!(max_pillars >= 1 && max_points >= 1, "pillar limits must be at least 1");
    let mut buckets: BTreeMap<usize, Vec<&LidarPoint>> = BTreeMap::new();
    for p in cloud.iter().filter(|p| p.is_finite()) {
        if let Some((r, c)) = spec.world_to_cell(p.x, p.y) {
            buckets.entry(spec.linear_index(r, c)).or_default().push(p);
        }
    }

    let mut ranked: Vec<(usize, usize)> = buckets.iter().map(|(&i, pts)| (i, pts.len())).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(max_pillars);
    let mut kept: Vec<usize> = ranked.into_iter().map(|(i, _)| i).collect();
    kept.sort_unstable();

    let mut features = vec![0.0f32; max_pillars * max_points * PILLAR_FEATURES];
    for (slot, &cell) in kept.iter().enumerate() {
        let pts = &buckets[&cell][..buckets[&cell].len().min(max_points)];
        let k = pts.len() as f64;
        let mean = |f: fn(&LidarPoint) -> f64| pts.iter().map(|p| f(p)).sum::<f64>() / k;
        let (mx, my, mz) = (mean(|p| p.x), mean(|p| p.y), mean(|p| p.z));
        let (cx, cy) = spec
            .cell_center(cell / spec.cols(), cell % spec.cols())
            .expect("bucketed cells lie in the grid");
        for (j, p) in pts.iter().enumerate() {
            let start = (slot * max_points + j) * PILLAR_FEATURES;
            let row = [
                p.x,
                p.y,
                p.z,
                p.intensity,
                p.x - mx,
                p.y - my,
                p.z - mz,
                p.x - cx,
                p.y - cy,
            ];
            for (dst, v) in features[start..start + PILLAR_FEATURES].iter_mut().zip(row) {
                *dst = v as f32;
            }
        }
    }

    PillarTensor {
        rows: spec.rows() as u32,
        cols: spec.cols() as u32,
        max_pillars: max_pillars as u32,
        max_points: max_points as u32,
        features,
        cell_indices: kept.into_iter().map(|i| i as u32).collect(),
    }
}

pub fn encode_pillars(t: &PillarTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(30 + 4 * (t.features.len() + t.cell_indices.len()));
    out.extend_from_slice(&PILLAR_MAGIC);
    out.write_u16::<LE>(FORMAT_VERSION).unwrap();
    for v in [
        t.rows,
        t.cols,
        t.max_pillars,
        t.max_points,
        PILLAR_FEATURES as u32,
        t.cell_indices.len() as u32,
    ] {
        out.write_u32::<LE>(v).unwrap();
    }
    for &v in &t.features {
        out.write_f32::<LE>(v).unwrap();
    }
    for &i in &t.cell_indices {
        out.write_u32::<LE>(i).unwrap();
    }
    out
}

pub fn decode_pillars(bytes: &[u8]) -> Result<PillarTensor, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(PILLAR_MAGIC)?;
    r.version()?;
    let rows = r.u32()?;
    let cols = r.u32()?;
    let max_pillars = r.u32()?;
    let max_points = r.u32()?;
    let d = r.u32()?;
    let count = r.u32()?;
    if d as usize != PILLAR_FEATURES {
        return Err(FormatError::Invalid(format!(
            "expected {PILLAR_FEATURES} features, found {d}"
        )));
    }
    let values = (max_pillars as usize)
        .checked_mul(max_points as usize)
        .and_then(|v| v.checked_mul(PILLAR_FEATURES))
        .ok_or_else(|| FormatError::Invalid("tensor too large".into()))?;
    r.expect_remaining((values + count as usize) * 4)?;

    let features = (0..values).map(|_| r.f32()).collect::<Result<Vec<_>, _>>()?;
    let cell_indices = (0..count).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
    let t = PillarTensor {
        rows,
        cols,
        max_pillars,
        max_points,
        features,
        cell_indices,
    };
    t.validate()?;
    Ok(t)
}

pub fn write_pillars(path: &Path, t: &PillarTensor) -> Result<(), FormatError> {
    t.validate()?;
    write_atomic(path, &encode_pillars(t))
}

pub fn read_pillars(path: &Path) -> Result<PillarTensor, FormatError> {
    decode_pillars(&read_file(path)?)
}
