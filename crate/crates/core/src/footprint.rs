//! Oriented bird's-eye-view rectangles and their rasterization.

use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;

/// Slack (meters) applied to point-in-rectangle tests so that points on an
/// edge or corner count as inside despite rounding.
const EDGE_EPS: f64 = 1e-9;

/// How a footprint claims grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    /// A cell is covered when its center lies inside the footprint.
    #[default]
    CellCenter,
    /// A cell is covered when it overlaps the footprint at all.
    AnyOverlap,
}

/// A yawed rectangle in the ground plane. `length` runs along the heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BevRect {
    pub center: (f64, f64),
    pub length: f64,
    pub width: f64,
    pub yaw: f64,
}

impl BevRect {
    pub fn new(center: (f64, f64), length: f64, width: f64, yaw: f64) -> Self {
        BevRect {
            center,
            length,
            width,
            yaw,
        }
    }

    pub fn has_positive_extent(&self) -> bool {
        self.length > 0.0 && self.width > 0.0 && self.length.is_finite() && self.width.is_finite()
    }

    /// Expresses a world point in the rectangle's own frame.
    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        let dx = x - self.center.0;
        let dy = y - self.center.1;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Boundary-inclusive containment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (lx, ly) = self.to_local(x, y);
        lx.abs() <= self.length / 2.0 + EDGE_EPS && ly.abs() <= self.width / 2.0 + EDGE_EPS
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        let (s, c) = self.yaw.sin_cos();
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .map(|(a, b)| (self.center.0 + c * a - s * b, self.center.1 + s * a + c * b))
    }

    /// Separating-axis overlap test against an axis-aligned square.
    pub fn overlaps_square(&self, min: (f64, f64), size: f64) -> bool {
        let square = [
            min,
            (min.0 + size, min.1),
            (min.0 + size, min.1 + size),
            (min.0, min.1 + size),
        ];
        let rect = self.corners();
        let (s, c) = self.yaw.sin_cos();
        let axes = [(1.0, 0.0), (0.0, 1.0), (c, s), (-s, c)];
        axes.iter().all(|&(ax, ay)| {
            let project = |pts: &[(f64, f64)]| {
                pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let d = p.0 * ax + p.1 * ay;
                    (lo.min(d), hi.max(d))
                })
            };
            let (a0, a1) = project(&square);
            let (b0, b1) = project(&rect);
            a1 > b0 && b1 > a0
        })
    }

    /// Grid cells claimed by this rectangle, in row-major order.
    pub fn cells(&self, spec: &GridSpec, coverage: Coverage) -> Vec<(usize, usize)> {
        let corners = self.corners();
        let (lo, hi) = corners.iter().fold(
            ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), &(x, y)| ((lo.0.min(x), lo.1.min(y)), (hi.0.max(x), hi.1.max(y))),
        );
        let (u0, v0) = spec.to_cell_coords(lo.0, lo.1);
        let (u1, v1) = spec.to_cell_coords(hi.0, hi.1);
        let r0 = (u0.floor() as i64 - 1).max(0);
        let c0 = (v0.floor() as i64 - 1).max(0);
        let r1 = (u1.floor() as i64 + 1).min(spec.rows() as i64 - 1);
        let c1 = (v1.floor() as i64 + 1).min(spec.cols() as i64 - 1);

        let mut out = Vec::new();
        let cs = spec.cell_size();
        for row in r0..=r1 {
            for col in c0..=c1 {
                let (row, col) = (row as usize, col as usize);
                let covered = match coverage {
                    Coverage::CellCenter => {
                        let (x, y) = spec.cell_center(row, col).expect("clamped to grid");
                        self.contains(x, y)
                    }
                    Coverage::AnyOverlap => {
                        let min = (spec.x_min() + row as f64 * cs, spec.y_min() + col as f64 * cs);
                        self.overlaps_square(min, cs)
                    }
                };
                if covered {
                    out.push((row, col));
                }
            }
        }
        out
    }
}
