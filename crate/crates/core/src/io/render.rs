use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};

use super::{write_atomic, FormatError};
use crate::evidence::BeliefMass;
use crate::grid::EvidentialGrid;

fn channel(m: f64) -> u8 {
    (255.0 * m.clamp(0.0, 1.0)).round() as u8
}

/// Red for static, green for free, blue for dynamic. Composite and unknown
/// mass stay dark.
pub fn rgb_for(m: &BeliefMass) -> [u8; 3] {
    [
        channel(m.static_occupied()),
        channel(m.free()),
        channel(m.dynamic_occupied()),
    ]
}

/// One pixel per cell, viewed from above: forward (+x) is up and left (+y)
/// is left, so row 0 lands on the bottom image row and col 0 on the right.
pub fn render_image(grid: &EvidentialGrid) -> RgbImage {
    let spec = grid.spec();
    let (rows, cols) = (spec.rows() as u32, spec.cols() as u32);
    let mut img = RgbImage::new(cols, rows);
    for ((r, c), m) in grid.iter() {
        img.put_pixel(cols - 1 - c as u32, rows - 1 - r as u32, Rgb(rgb_for(m)));
    }
    img
}

pub fn render_png(grid: &EvidentialGrid, path: &Path) -> Result<(), FormatError> {
    let mut bytes = std::io::Cursor::new(Vec::new());
    render_image(grid).write_to(&mut bytes, ImageFormat::Png)?;
    write_atomic(path, bytes.get_ref())
}
