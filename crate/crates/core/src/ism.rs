//! Geometric inverse sensor model: a height-band ground model turning a
//! single scan into sparse free / statically occupied evidence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::PointCloud;
use crate::evidence::{BeliefMass, EvidenceError, Hypothesis};
use crate::grid::{EvidentialGrid, GridError, GridSpec};
use crate::traversal::Supercover;

#[derive(Debug, Error)]
pub enum IsmError {
    #[error("ground band must satisfy z_min < z_max, got ({0}, {1})")]
    BadBand(f64, f64),
    #[error("per-ray masses must lie strictly between 0 and 1")]
    BadMass,
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsmConfig {
    /// Returns with `z` in `[z_min, z_max]` are ground.
    pub ground_band: (f64, f64),
    pub free_mass_per_ray: f64,
    pub occupied_mass_per_hit: f64,
    /// Where rays start, ego frame.
    pub sensor_origin: (f64, f64),
}

impl Default for IsmConfig {
    fn default() -> Self {
        IsmConfig {
            ground_band: (-0.3, 0.3),
            free_mass_per_ray: 0.05,
            occupied_mass_per_hit: 0.3,
            sensor_origin: (0.0, 0.0),
        }
    }
}

impl IsmConfig {
    pub fn validate(&self) -> Result<(), IsmError> {
        let (lo, hi) = self.ground_band;
        // Negated so NaN bounds are rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(lo < hi) {
            return Err(IsmError::BadBand(lo, hi));
        }
        let open_unit = |m: f64| m > 0.0 && m < 1.0;
        if !open_unit(self.free_mass_per_ray) || !open_unit(self.occupied_mass_per_hit) {
            return Err(IsmError::BadMass);
        }
        Ok(())
    }
}

/// Builds an evidential grid from one point cloud.
///
/// Every cell on the way from the sensor to a return gets a free deposit.
/// Ground returns also free their own cell; returns above the band put
/// static evidence on their cell instead. Returns below the band are
/// ignored. Points are processed in cloud order.
pub fn geometric_ism(cloud: &PointCloud, config: &IsmConfig, spec: &GridSpec) -> Result<EvidentialGrid, IsmError> {
    config.validate()?;
    let free = BeliefMass::simple(Hypothesis::Free, config.free_mass_per_ray)?;
    let occupied = BeliefMass::simple(Hypothesis::Static, config.occupied_mass_per_hit)?;
    let (z_lo, z_hi) = config.ground_band;
    let start = spec.to_cell_coords(config.sensor_origin.0, config.sensor_origin.1);

    let mut grid = EvidentialGrid::new(*spec);
    for p in cloud.iter() {
        if !p.is_finite() || p.z < z_lo {
            continue;
        }
        let obstacle = p.z > z_hi;
        let end = spec.to_cell_coords(p.x, p.y);
        let mut cells = Supercover::new(start, end).peekable();
        while let Some((r, c)) = cells.next() {
            let last = cells.peek().is_none();
            let Some((r, c)) = spec.checked_index(r, c) else {
                continue;
            };
            let mass = if last && obstacle { &occupied } else { &free };
            grid.deposit(r, c, mass)?;
        }
    }
    Ok(grid)
}
