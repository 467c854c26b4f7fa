use std::path::Path;

use byteorder::{WriteBytesExt, LE};

use super::{read_file, widen_decimal, write_atomic, FormatError, Reader, FORMAT_VERSION};
use crate::evidence::BeliefMass;
use crate::grid::{EvidentialGrid, GridSpec};

pub const OGM_MAGIC: [u8; 4] = *b"EOGM";
const CHANNELS: u8 = 4;
const HEADER_LEN: usize = 4 + 2 + 4 + 4 + 4 + 1;
const SUM_SLACK: f64 = 1e-6;

/// Rounds the four stored masses to `f32`, nudging the largest down by ulps
/// if rounding pushed their sum above one.
fn quantize(m: &BeliefMass) -> [f32; 4] {
    let mut q = [
        m.free() as f32,
        m.static_occupied() as f32,
        m.dynamic_occupied() as f32,
        m.occupied_either() as f32,
    ];
    while q.iter().map(|&v| v as f64).sum::<f64>() > 1.0 {
        let (i, _) = q
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("four channels");
        q[i] = q[i].next_down();
    }
    q
}

pub fn encode_ogm(grid: &EvidentialGrid) -> Vec<u8> {
    let spec = grid.spec();
    let mut out = Vec::with_capacity(HEADER_LEN + spec.cell_count() * 16);
    out.extend_from_slice(&OGM_MAGIC);
    out.write_u16::<LE>(FORMAT_VERSION).unwrap();
    out.write_u32::<LE>(spec.rows() as u32).unwrap();
    out.write_u32::<LE>(spec.cols() as u32).unwrap();
    out.write_f32::<LE>(spec.cell_size() as f32).unwrap();
    out.write_u8(CHANNELS).unwrap();
    for m in grid.cells() {
        for v in quantize(m) {
            out.write_f32::<LE>(v).unwrap();
        }
    }
    out
}

pub fn decode_ogm(bytes: &[u8]) -> Result<EvidentialGrid, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(OGM_MAGIC)?;
    r.version()?;
    let rows = r.u32()? as usize;
    let cols = r.u32()? as usize;
    let cell = r.f32()?;
    let channels = r.u8()?;
    if channels != CHANNELS {
        return Err(FormatError::Invalid(format!("expected 4 channels, found {channels}")));
    }
    let spec =
        GridSpec::from_cells(rows, cols, widen_decimal(cell)).map_err(|e| FormatError::Invalid(e.to_string()))?;
    r.expect_remaining(spec.cell_count() * 16)?;

    let mut cells = Vec::with_capacity(spec.cell_count());
    for idx in 0..spec.cell_count() {
        let mut q = [0.0f64; 4];
        for v in q.iter_mut() {
            *v = r.f32()? as f64;
        }
        if q.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(FormatError::Invalid(format!("cell {idx}: mass outside [0, 1]")));
        }
        let sum: f64 = q.iter().sum();
        if sum > 1.0 + SUM_SLACK {
            return Err(FormatError::Invalid(format!("cell {idx}: masses sum to {sum}")));
        }
        if sum > 1.0 {
            q.iter_mut().for_each(|v| *v /= sum);
        }
        let m =
            BeliefMass::new(q[0], q[1], q[2], q[3]).map_err(|e| FormatError::Invalid(format!("cell {idx}: {e}")))?;
        cells.push(m);
    }
    EvidentialGrid::from_cells(spec, cells).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_ogm(path: &Path, grid: &EvidentialGrid) -> Result<(), FormatError> {
    write_atomic(path, &encode_ogm(grid))
}

pub fn read_ogm(path: &Path) -> Result<EvidentialGrid, FormatError> {
    decode_ogm(&read_file(path)?)
}
