//! Bird's-eye-view evidential raster.
//!
//! Rows run along the ego `x` axis (forward), columns along `y` (left). The
//! ego origin sits at the grid center and cells are half-open intervals
//! `[low, high)` on both axes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{combine_dempster, BeliefMass, EvidenceError};

/// Forward extent of the default grid, meters.
pub const DEFAULT_LENGTH_M: f64 = 81.92;
/// Lateral extent of the default grid, meters.
pub const DEFAULT_WIDTH_M: f64 = 56.32;
/// Edge length of a default grid cell, meters.
pub const DEFAULT_CELL_SIZE_M: f64 = 0.32;

// Coordinates this close to a cell boundary (in cell units) snap onto it, so
// that e.g. 40.96 / 0.32 lands on 128 rather than 127.99999999999999.
const BOUNDARY_SNAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("cell size must be positive and finite, got {0}")]
    BadCellSize(f64),
    #[error("extent {extent} m is not a positive whole number of {cell} m cells")]
    NonIntegralExtent { extent: f64, cell: f64 },
    #[error("cell ({row}, {col}) outside {rows}x{cols} grid")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} cells, got {actual}")]
    CellCount { expected: usize, actual: usize },
    #[error("grid geometries differ")]
    SpecMismatch,
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
}

/// Grid geometry. Construct with [`GridSpec::new`] or [`GridSpec::from_cells`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
    cell_size: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(DEFAULT_LENGTH_M, DEFAULT_WIDTH_M, DEFAULT_CELL_SIZE_M).expect("default geometry is integral")
    }
}

impl GridSpec {
    /// A grid `length_m` long (forward) and `width_m` wide, centered on the ego.
    pub fn new(length_m: f64, width_m: f64, cell_size_m: f64) -> Result<Self, GridError> {
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(GridError::BadCellSize(cell_size_m));
        }
        let count = |extent: f64| -> Result<usize, GridError> {
            let n = extent / cell_size_m;
            let rounded = n.round();
            if !n.is_finite() || rounded < 1.0 || (n - rounded).abs() > 1e-6 {
                return Err(GridError::NonIntegralExtent {
                    extent,
                    cell: cell_size_m,
                });
            }
            Ok(rounded as usize)
        };
        Ok(GridSpec {
            rows: count(length_m)?,
            cols: count(width_m)?,
            cell_size: cell_size_m,
        })
    }

    pub fn from_cells(rows: usize, cols: usize, cell_size_m: f64) -> Result<Self, GridError> {
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(GridError::BadCellSize(cell_size_m));
        }
        if rows == 0 || cols == 0 {
            return Err(GridError::NonIntegralExtent {
                extent: 0.0,
                cell: cell_size_m,
            });
        }
        Ok(GridSpec {
            rows,
            cols,
            cell_size: cell_size_m,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn length_m(&self) -> f64 {
        self.rows as f64 * self.cell_size
    }

    pub fn width_m(&self) -> f64 {
        self.cols as f64 * self.cell_size
    }

    /// Lower `x` edge of row 0.
    pub fn x_min(&self) -> f64 {
        -self.length_m() / 2.0
    }

    /// Lower `y` edge of column 0.
    pub fn y_min(&self) -> f64 {
        -self.width_m() / 2.0
    }

    /// Continuous cell coordinates `(u, v)`: cell `(r, c)` spans
    /// `[r, r+1) × [c, c+1)`.
    pub fn to_cell_coords(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x_min()) / self.cell_size, (y - self.y_min()) / self.cell_size)
    }

    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (u, v) = self.to_cell_coords(x, y);
        let row = snapped_floor(u);
        let col = snapped_floor(v);
        self.checked_index(row, col)
    }

    /// Index of a signed cell coordinate if it lies on the grid.
    pub fn checked_index(&self, row: i64, col: i64) -> Option<(usize, usize)> {
        if row < 0 || col < 0 || row >= self.rows as i64 || col >= self.cols as i64 {
            None
        } else {
            Some((row as usize, col as usize))
        }
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Result<(f64, f64), GridError> {
        self.check(row, col)?;
        Ok((
            self.x_min() + (row as f64 + 0.5) * self.cell_size,
            self.y_min() + (col as f64 + 0.5) * self.cell_size,
        ))
    }

    pub fn linear_index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn contains_index(&self, row: usize, col: usize) -> bool {
        row < self.rows && col < self.cols
    }

    pub(crate) fn check(&self, row: usize, col: usize) -> Result<(), GridError> {
        if self.contains_index(row, col) {
            Ok(())
        } else {
            Err(GridError::IndexOutOfRange {
                row,
                col,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

/// `floor`, except that values within [`BOUNDARY_SNAP`] of an integer are
/// treated as that integer.
pub(crate) fn snapped_floor(t: f64) -> i64 {
    let r = t.round();
    if (t - r).abs() <= BOUNDARY_SNAP {
        r as i64
    } else {
        t.floor() as i64
    }
}

/// Outcome of a single [`EvidentialGrid::deposit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deposit {
    Combined,
    /// The new mass totally conflicted with the cell; the cell was kept.
    Conflict,
}

/// A raster of belief masses, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidentialGrid {
    spec: GridSpec,
    cells: Vec<BeliefMass>,
    conflicts: u64,
}

impl EvidentialGrid {
    /// A grid with every cell vacuous.
    pub fn new(spec: GridSpec) -> Self {
        Self::filled(spec, BeliefMass::VACUOUS)
    }

    pub fn filled(spec: GridSpec, mass: BeliefMass) -> Self {
        EvidentialGrid {
            spec,
            cells: vec![mass; spec.cell_count()],
            conflicts: 0,
        }
    }

    pub fn from_cells(spec: GridSpec, cells: Vec<BeliefMass>) -> Result<Self, GridError> {
        if cells.len() != spec.cell_count() {
            return Err(GridError::CellCount {
                expected: spec.cell_count(),
                actual: cells.len(),
            });
        }
        Ok(EvidentialGrid {
            spec,
            cells,
            conflicts: 0,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[BeliefMass] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Result<&BeliefMass, GridError> {
        self.spec.check(row, col)?;
        Ok(&self.cells[self.spec.linear_index(row, col)])
    }

    pub fn set(&mut self, row: usize, col: usize, mass: BeliefMass) -> Result<(), GridError> {
        self.spec.check(row, col)?;
        let idx = self.spec.linear_index(row, col);
        self.cells[idx] = mass;
        Ok(())
    }

    /// Number of deposits that were dropped because of total conflict.
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    /// Combines `mass` into a cell with Dempster's rule. On total conflict the
    /// old cell is kept and the conflict counter is bumped.
    pub fn deposit(&mut self, row: usize, col: usize, mass: &BeliefMass) -> Result<Deposit, GridError> {
        self.spec.check(row, col)?;
        let idx = self.spec.linear_index(row, col);
        match combine_dempster(&self.cells[idx], mass) {
            Ok(m) => {
                self.cells[idx] = m;
                Ok(Deposit::Combined)
            }
            Err(EvidenceError::TotalConflict { .. }) => {
                self.conflicts += 1;
                Ok(Deposit::Conflict)
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &BeliefMass)> + '_ {
        let cols = self.spec.cols;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, m)| ((i / cols, i % cols), m))
    }
}
