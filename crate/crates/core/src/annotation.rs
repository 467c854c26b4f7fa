//! Crisp label grids from annotated samples: object boxes, a drivable-surface
//! raster and the lidar cloud, with cells hidden behind obstacles masked out.

use std::collections::HashSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::PointCloud;
use crate::evidence::{classify_cell, BeliefMass, Hypothesis};
use crate::footprint::{BevRect, Coverage};
use crate::grid::{EvidentialGrid, GridError, GridSpec};
use crate::traversal::Supercover;

/// Default minimum number of lidar points before an object is labelled.
pub const DEFAULT_MIN_POINTS: usize = 20;
/// Default number of equally spaced rays for occlusion masking.
pub const DEFAULT_VISIBILITY_RAYS: u32 = 4096;

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("drivable map is {map_rows}x{map_cols}, grid is {rows}x{cols}")]
    DimensionMismatch {
        map_rows: usize,
        map_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("protected mask has {actual} cells, grid has {expected}")]
    MaskLength { expected: usize, actual: usize },
    #[error("sensor origin ({x}, {y}) lies outside the grid")]
    SensorOutside { x: f64, y: f64 },
    #[error("box {0} has a non-positive extent")]
    InvalidBox(u32),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A dynamic-class object annotation, reduced to its ground footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedBox {
    pub id: u32,
    pub rect: BevRect,
}

/// Boolean drivable-surface layer, row-major, aligned to a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrivableMap {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl DrivableMap {
    pub fn new(rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self, AnnotationError> {
        if cells.len() != rows * cols {
            return Err(AnnotationError::MaskLength {
                expected: rows * cols,
                actual: cells.len(),
            });
        }
        Ok(DrivableMap { rows, cols, cells })
    }

    pub fn filled(rows: usize, cols: usize, drivable: bool) -> Self {
        DrivableMap {
            rows,
            cols,
            cells: vec![drivable; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, drivable: bool) {
        self.cells[row * self.cols + col] = drivable;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedSample {
    /// Lidar cloud in the ego frame.
    pub cloud: PointCloud,
    pub boxes: Vec<AnnotatedBox>,
    pub drivable: DrivableMap,
    /// Sensor position in the ego frame, meters.
    pub sensor_origin: (f64, f64),
}

/// How the sensor's line of sight is resolved on the raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    /// Rays at `rays` equally spaced bearings, the first along +x. Gaps
    /// between obstacles narrower than the ray spacing are treated as closed.
    Sampled { rays: u32 },
    /// The exact visibility region: a cell is visible if any ray reaches it.
    Exact,
}

impl Default for Visibility {
    fn default() -> Self {
        Visibility::Sampled {
            rays: DEFAULT_VISIBILITY_RAYS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotationConfig {
    pub min_points: usize,
    pub coverage: Coverage,
    pub visibility: Visibility,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        AnnotationConfig {
            min_points: DEFAULT_MIN_POINTS,
            coverage: Coverage::CellCenter,
            visibility: Visibility::default(),
        }
    }
}

/// Points whose ground projection falls inside `rect`, edges included.
pub fn points_in_box(cloud: &PointCloud, rect: &BevRect) -> usize {
    cloud.iter().filter(|p| rect.contains(p.x, p.y)).count()
}

/// Builds the crisp label grid for one annotated sample.
///
/// Footprints of objects with at least `min_points` returns become `O_d`,
/// remaining drivable cells `F`, everything else `O_s`. Cells hidden behind
/// an occupied cell are then reset to `Θ`, except object footprints.
pub fn generate_label_from_annotations(
    sample: &AnnotatedSample,
    spec: &GridSpec,
    config: &AnnotationConfig,
) -> Result<EvidentialGrid, AnnotationError> {
    let map = &sample.drivable;
    if map.rows != spec.rows() || map.cols != spec.cols() {
        return Err(AnnotationError::DimensionMismatch {
            map_rows: map.rows,
            map_cols: map.cols,
            rows: spec.rows(),
            cols: spec.cols(),
        });
    }

    let mut objects = HashSet::new();
    for b in &sample.boxes {
        if !b.rect.has_positive_extent() {
            return Err(AnnotationError::InvalidBox(b.id));
        }
        if points_in_box(&sample.cloud, &b.rect) >= config.min_points {
            objects.extend(b.rect.cells(spec, config.coverage));
        }
    }

    let cells = (0..spec.rows())
        .flat_map(|r| (0..spec.cols()).map(move |c| (r, c)))
        .map(|(r, c)| {
            let h = if objects.contains(&(r, c)) {
                Hypothesis::Dynamic
            } else if map.get(r, c) {
                Hypothesis::Free
            } else {
                Hypothesis::Static
            };
            BeliefMass::certain(h)
        })
        .collect();
    let grid = EvidentialGrid::from_cells(*spec, cells)?;
    occlusion_mask_with(&grid, sample.sensor_origin, &objects, config.visibility)
}

/// Resets every cell the sensor cannot see to the vacuous mass, unless it is
/// in `protected`.
///
/// Cells labelled occupied (static, dynamic or either) block sight; the
/// blocking cell itself stays visible. A cell is hidden only when every ray
/// from the sensor through its interior meets a blocker first.
pub fn occlusion_mask(
    grid: &EvidentialGrid,
    sensor_origin: (f64, f64),
    protected: &HashSet<(usize, usize)>,
) -> Result<EvidentialGrid, AnnotationError> {
    occlusion_mask_with(grid, sensor_origin, protected, Visibility::default())
}

pub fn occlusion_mask_with(
    grid: &EvidentialGrid,
    sensor_origin: (f64, f64),
    protected: &HashSet<(usize, usize)>,
    visibility: Visibility,
) -> Result<EvidentialGrid, AnnotationError> {
    let spec = grid.spec();
    if spec.world_to_cell(sensor_origin.0, sensor_origin.1).is_none() {
        return Err(AnnotationError::SensorOutside {
            x: sensor_origin.0,
            y: sensor_origin.1,
        });
    }
    let blocking: Vec<bool> = grid
        .cells()
        .iter()
        .map(|m| classify_cell(m, 0.5).is_occupied())
        .collect();
    let sensor = spec.to_cell_coords(sensor_origin.0, sensor_origin.1);
    let visible = visible_cells(spec.rows(), spec.cols(), &blocking, sensor, visibility);

    let mut out = grid.clone();
    for (idx, seen) in visible.into_iter().enumerate() {
        let rc = (idx / spec.cols(), idx % spec.cols());
        if !seen && !protected.contains(&rc) {
            out.set(rc.0, rc.1, BeliefMass::VACUOUS)?;
        }
    }
    Ok(out)
}

/// Cells seen from `sensor` (continuous cell coordinates) on a `rows x cols`
/// raster.
///
/// Each ray walks its supercover from the sensor cell outward and stops
/// after the first blocking cell, which is itself visible. The sensor cell
/// never blocks.
///
/// # Panics
/// If `blocking` does not have `rows * cols` entries, or a sampled
/// visibility asks for zero rays.
pub fn visible_cells(
    rows: usize,
    cols: usize,
    blocking: &[bool],
    sensor: (f64, f64),
    visibility: Visibility,
) -> Vec<bool> {
    assert_eq!(blocking.len(), rows * cols, "blocking mask must cover the grid");
    let (su, sv) = sensor;
    let reach = (rows + cols + 2) as f64;
    let mut visible = vec![false; rows * cols];
    let mut cast = |angle: f64| {
        let end = (su + reach * angle.cos(), sv + reach * angle.sin());
        for (k, (r, c)) in Supercover::new(sensor, end).enumerate() {
            if r < 0 || c < 0 || r >= rows as i64 || c >= cols as i64 {
                break;
            }
            let idx = r as usize * cols + c as usize;
            visible[idx] = true;
            if k > 0 && blocking[idx] {
                break;
            }
        }
    };
    match visibility {
        Visibility::Sampled { rays } => {
            assert!(rays > 0, "sampled visibility needs at least one ray");
            for k in 0..rays {
                cast(TAU * k as f64 / rays as f64);
            }
        }
        Visibility::Exact => {
            // The set of cells a ray crosses only changes when the ray sweeps
            // over a lattice corner, so one ray per interval between
            // consecutive corner bearings reaches everything any ray can.
            let mut bearings: Vec<f64> = Vec::with_capacity((rows + 1) * (cols + 1));
            for i in 0..=rows {
                for j in 0..=cols {
                    let du = i as f64 - su;
                    let dv = j as f64 - sv;
                    if du != 0.0 || dv != 0.0 {
                        bearings.push(dv.atan2(du));
                    }
                }
            }
            bearings.sort_by(f64::total_cmp);
            bearings.dedup();
            match bearings.len() {
                0 => {}
                1 => cast(bearings[0] + std::f64::consts::PI),
                n => {
                    for k in 0..n {
                        let next = if k + 1 < n { bearings[k + 1] } else { bearings[0] + TAU };
                        cast((bearings[k] + next) / 2.0);
                    }
                }
            }
        }
    }
    visible
}
