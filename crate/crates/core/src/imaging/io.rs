//! PGM (P2 / P5) and `QVOL` raw volume I/O.
//!
//! `QVOL` layout: the 4 bytes `QVOL`, width, height and depth as
//! little-endian u32, then width·height·depth little-endian f64 values
//! with x fastest.

use std::path::Path;
use std::str::FromStr;

use super::{EdgeMap, ImageVolume};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    RawVol,
}

impl ImageFormat {
    /// `.qvol` / `.vol` are raw volumes, anything else is PGM.
    pub fn from_path(path: &Path) -> ImageFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("qvol" | "vol" | "rawvol") => ImageFormat::RawVol,
            _ => ImageFormat::Pgm,
        }
    }
}

impl FromStr for ImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(ImageFormat::Pgm),
            "rawvol" | "qvol" => Ok(ImageFormat::RawVol),
            other => Err(Error::Config(format!("unknown image format `{other}`"))),
        }
    }
}

pub fn load_image(path: &Path, format: ImageFormat) -> Result<ImageVolume> {
    let bytes = std::fs::read(path)?;
    match format {
        ImageFormat::Pgm => parse_pgm(&bytes),
        ImageFormat::RawVol => parse_qvol(&bytes),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(start, format!("expected {what}")))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<ImageVolume> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(Error::parse(0, "expected P2 or P5 magic")),
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval_at = h.pos;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::parse(2, "zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(maxval_at, format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width * height;
    let mut values = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte after maxval
        let start = h.pos + 1;
        let per = if maxval < 256 { 1 } else { 2 };
        let end = start + count * per;
        if bytes.len() < end {
            return Err(Error::parse(bytes.len(), format!("raster truncated: need {end} bytes")));
        }
        for k in 0..count {
            let at = start + k * per;
            let v = if per == 1 { bytes[at] as usize } else { u16::from_be_bytes([bytes[at], bytes[at + 1]]) as usize };
            if v > maxval {
                return Err(Error::parse(at, format!("sample {v} above maxval {maxval}")));
            }
            values.push(v as f64);
        }
    } else {
        for _ in 0..count {
            h.skip_space();
            if h.pos >= bytes.len() {
                return Err(Error::parse(bytes.len(), format!("raster truncated after {} samples", values.len())));
            }
            let at = h.pos;
            let v = h.number("sample")?;
            if v > maxval {
                return Err(Error::parse(at, format!("sample {v} above maxval {maxval}")));
            }
            values.push(v as f64);
        }
    }
    ImageVolume::new_2d(width, height, values)
}

pub fn parse_qvol(bytes: &[u8]) -> Result<ImageVolume> {
    if bytes.get(..4) != Some(b"QVOL") {
        return Err(Error::parse(0, "expected QVOL magic"));
    }
    if bytes.len() < 16 {
        return Err(Error::parse(bytes.len(), "header truncated"));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes")) as usize;
    let shape = [dim(0), dim(1), dim(2)];
    if shape.contains(&0) {
        return Err(Error::parse(4, "zero volume dimension"));
    }
    let count = shape.iter().product::<usize>();
    let end = 16 + 8 * count;
    if bytes.len() != end {
        return Err(Error::parse(bytes.len().min(end), format!("expected {end} bytes, found {}", bytes.len())));
    }
    let mut values = Vec::with_capacity(count);
    for k in 0..count {
        let at = 16 + 8 * k;
        let v = f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::parse(at, format!("voxel {v} is not a finite nonnegative value")));
        }
        values.push(v);
    }
    ImageVolume::new(shape, values)
}

/// P5 with maxval 255; values are clamped to [0, 1] and scaled. Only the
/// first slice of a volume is written.
pub fn write_pgm(map: &EdgeMap) -> Vec<u8> {
    let [w, h, _] = map.shape();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(map.values()[..w * h].iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn write_qvol(shape: [usize; 3], values: &[f64]) -> Vec<u8> {
    let mut out = b"QVOL".to_vec();
    for d in shape {
        out.extend((d as u32).to_le_bytes());
    }
    for v in values {
        out.extend(v.to_le_bytes());
    }
    out
}
