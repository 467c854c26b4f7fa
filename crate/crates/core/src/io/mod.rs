//! On-disk formats. All binary formats are little-endian.
//!
//! | file      | magic  | contents                                   |
//! |-----------|--------|--------------------------------------------|
//! | `.eogm`   | `EOGM` | evidential grid, four f32 masses per cell  |
//! | `.epcl`   | `EPCL` | point cloud, five f32 per point            |
//! | `.epil`   | `EPIL` | pillar feature tensor and cell indices     |
//!
//! Scene descriptions are TOML, annotated-sample sidecars JSON. See
//! `docs/formats.md` for the byte layouts and document schemas.

mod cloud_file;
mod ogm;
mod pillar;
mod render;
mod sample;
mod scene_file;

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

pub use cloud_file::{decode_cloud, encode_cloud, read_cloud, write_cloud, CLOUD_MAGIC};
pub use ogm::{decode_ogm, encode_ogm, read_ogm, write_ogm, OGM_MAGIC};
pub use pillar::{
    decode_pillars, encode_pillars, pillarize, read_pillars, write_pillars, PillarTensor, PILLAR_FEATURES, PILLAR_MAGIC,
};
pub use render::{render_image, render_png, rgb_for};
pub use sample::{read_annotated_sample, write_annotated_sample, LoadedSample, SampleDocument};
pub use scene_file::{parse_scene, read_scene, SceneFile, SceneSetup, Variation};

pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated file: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("invalid content: {0}")]
    Invalid(String),
    #[error("scene document: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("sample document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("image encoding: {0}")]
    Image(#[from] image::ImageError),
}

impl FormatError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|e| FormatError::io(path, e))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| FormatError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| FormatError::io(path, e))?;
    // Temporary files are created owner-only; outputs are ordinary files.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(|e| FormatError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| FormatError::io(path, e.error))?;
    Ok(())
}

/// Little-endian cursor over a byte slice that reports truncation in terms
/// of the full expected length.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn magic(&mut self, expected: [u8; 4]) -> Result<(), FormatError> {
        let found: [u8; 4] = self.take(4)?.try_into().expect("took 4 bytes");
        if found != expected {
            return Err(FormatError::BadMagic { expected, found });
        }
        Ok(())
    }

    pub(crate) fn version(&mut self) -> Result<(), FormatError> {
        match self.u16()? {
            FORMAT_VERSION => Ok(()),
            v => Err(FormatError::UnsupportedVersion(v)),
        }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() - self.pos < n {
            return Err(FormatError::Truncated {
                expected: self.pos + n,
                actual: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Fails early when the remaining bytes cannot hold `n` more bytes.
    pub(crate) fn expect_remaining(&self, n: usize) -> Result<(), FormatError> {
        let remaining = self.bytes.len() - self.pos;
        if remaining < n {
            Err(FormatError::Truncated {
                expected: self.pos + n,
                actual: self.bytes.len(),
            })
        } else if remaining > n {
            Err(FormatError::TrailingBytes(remaining - n))
        } else {
            Ok(())
        }
    }

    pub(crate) fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(byteorder::LittleEndian::read_u16(self.take(2)?))
    }

    pub(crate) fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(byteorder::LittleEndian::read_u32(self.take(4)?))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(byteorder::LittleEndian::read_u64(self.take(8)?))
    }

    pub(crate) fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(byteorder::LittleEndian::read_f32(self.take(4)?))
    }
}

use byteorder::ByteOrder as _;

/// Widens an `f32` through its shortest decimal form, so a value written
/// from `0.32_f64` reads back as `0.32_f64` rather than `0.3199999928…`.
pub(crate) fn widen_decimal(v: f32) -> f64 {
    v.to_string().parse().expect("f32 display output parses as f64")
}
