//! JSON sidecar describing an annotated sample. The cloud lives next to it
//! as a `.epcl` file.

use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::{read_cloud, read_file, write_atomic, write_cloud, FormatError, FORMAT_VERSION};
use crate::annotation::{AnnotatedBox, AnnotatedSample, AnnotationConfig, DrivableMap};
use crate::footprint::BevRect;
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDocument {
    pub version: u16,
    /// Cloud file, relative to the sidecar. Defaults to the sidecar's stem
    /// with a `.epcl` extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<String>,
    pub sensor_origin: [f64; 2],
    /// Defaults to the standard 256 x 176 grid at 0.32 m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_points: Option<usize>,
    pub boxes: Vec<BoxDoc>,
    pub drivable: DrivableDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub rows: usize,
    pub cols: usize,
    pub cell_size_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDoc {
    pub id: u32,
    pub center: [f64; 2],
    pub length: f64,
    pub width: f64,
    /// Radians, counter-clockwise from +x.
    pub yaw: f64,
}

/// Row-major drivable raster, bits packed least-significant first, base64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivableDoc {
    pub rows: usize,
    pub cols: usize,
    pub bits: String,
}

/// Everything needed to label one annotated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSample {
    pub sample: AnnotatedSample,
    pub spec: GridSpec,
    pub config: AnnotationConfig,
}

fn pack_bits(cells: &[bool]) -> String {
    let mut bytes = vec![0u8; cells.len().div_ceil(8)];
    for (i, _) in cells.iter().enumerate().filter(|(_, &b)| b) {
        bytes[i / 8] |= 1 << (i % 8);
    }
    STANDARD.encode(bytes)
}

fn unpack_bits(doc: &DrivableDoc) -> Result<DrivableMap, FormatError> {
    let n = doc
        .rows
        .checked_mul(doc.cols)
        .ok_or_else(|| FormatError::Invalid("drivable raster too large".into()))?;
    let bytes = STANDARD
        .decode(&doc.bits)
        .map_err(|e| FormatError::Invalid(format!("drivable bits: {e}")))?;
    if bytes.len() != n.div_ceil(8) {
        return Err(FormatError::Invalid(format!(
            "drivable bits hold {} bytes, {}x{} raster needs {}",
            bytes.len(),
            doc.rows,
            doc.cols,
            n.div_ceil(8)
        )));
    }
    if n % 8 != 0 && bytes[n / 8] >> (n % 8) != 0 {
        return Err(FormatError::Invalid("drivable padding bits must be zero".into()));
    }
    let cells = (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
    DrivableMap::new(doc.rows, doc.cols, cells).map_err(|e| FormatError::Invalid(e.to_string()))
}

fn default_cloud_path(sidecar: &Path) -> PathBuf {
    sidecar.with_extension("epcl")
}

pub fn read_annotated_sample(path: &Path) -> Result<LoadedSample, FormatError> {
    let doc: SampleDocument = serde_json::from_slice(&read_file(path)?)?;
    if doc.version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(doc.version));
    }
    let spec = match doc.grid {
        Some(g) => {
            GridSpec::from_cells(g.rows, g.cols, g.cell_size_m).map_err(|e| FormatError::Invalid(e.to_string()))?
        }
        None => GridSpec::default(),
    };
    let cloud_path = match &doc.cloud {
        Some(name) => path.parent().unwrap_or(Path::new("")).join(name),
        None => default_cloud_path(path),
    };
    let cloud = read_cloud(&cloud_path)?;
    let boxes = doc
        .boxes
        .iter()
        .map(|b| AnnotatedBox {
            id: b.id,
            rect: BevRect::new((b.center[0], b.center[1]), b.length, b.width, b.yaw),
        })
        .collect();
    let config = AnnotationConfig {
        min_points: doc.min_points.unwrap_or(AnnotationConfig::default().min_points),
        ..Default::default()
    };
    Ok(LoadedSample {
        sample: AnnotatedSample {
            cloud,
            boxes,
            drivable: unpack_bits(&doc.drivable)?,
            sensor_origin: (doc.sensor_origin[0], doc.sensor_origin[1]),
        },
        spec,
        config,
    })
}

/// Writes the sidecar at `path` and the cloud next to it.
pub fn write_annotated_sample(path: &Path, loaded: &LoadedSample) -> Result<(), FormatError> {
    let LoadedSample { sample, spec, config } = loaded;
    let doc = SampleDocument {
        version: FORMAT_VERSION,
        cloud: None,
        sensor_origin: [sample.sensor_origin.0, sample.sensor_origin.1],
        grid: Some(GridDoc {
            rows: spec.rows(),
            cols: spec.cols(),
            cell_size_m: spec.cell_size(),
        }),
        min_points: Some(config.min_points),
        boxes: sample
            .boxes
            .iter()
            .map(|b| BoxDoc {
                id: b.id,
                center: [b.rect.center.0, b.rect.center.1],
                length: b.rect.length,
                width: b.rect.width,
                yaw: b.rect.yaw,
            })
            .collect(),
        drivable: DrivableDoc {
            rows: sample.drivable.rows(),
            cols: sample.drivable.cols(),
            bits: pack_bits(sample.drivable.cells()),
        },
    };
    write_cloud(&default_cloud_path(path), &sample.cloud)?;
    write_atomic(path, &serde_json::to_vec_pretty(&doc)?)
}
