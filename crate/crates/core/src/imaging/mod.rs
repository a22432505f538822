//! Data-level decomposition: image volumes, lines along an axis, buffered
//! windows for QHED, and reassembly of per-window differences into edge
//! maps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod decompose;
mod io;

pub use decompose::{
    encode_window, plan_decomposition, reassemble, reassemble_lines, window_edges_from_amplitudes,
    window_edges_from_probabilities, EncodedWindow, SubdomainPlan, Window,
};
pub use io::{load_image, parse_pgm, parse_qvol, write_pgm, write_qvol, ImageFormat};

/// Line direction. Row lines run along x, column lines along y and depth
/// lines along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
    Depth,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Row, Axis::Column, Axis::Depth];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Row => "row",
            Axis::Column => "col",
            Axis::Depth => "depth",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(Axis::Row),
            "col" | "column" => Ok(Axis::Column),
            "depth" => Ok(Axis::Depth),
            other => Err(Error::Config(format!("unknown axis `{other}`"))),
        }
    }
}

/// Nonnegative intensities on a (width, height, depth) grid, x fastest.
/// 2D images have depth 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVolume {
    shape: [usize; 3],
    values: Vec<f64>,
}

impl ImageVolume {
    pub fn new(shape: [usize; 3], values: Vec<f64>) -> Result<Self> {
        check_shape(shape, values.len())?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("intensity {v} is not a finite nonnegative value")));
        }
        Ok(ImageVolume { shape, values })
    }

    pub fn new_2d(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Self::new([width, height, 1], values)
    }

    pub fn from_fn(shape: [usize; 3], f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(shape.iter().product());
        for z in 0..shape[2] {
            for y in 0..shape[1] {
                for x in 0..shape[0] {
                    values.push(f(x, y, z));
                }
            }
        }
        Self::new(shape, values)
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_2d(&self) -> bool {
        self.shape[2] == 1
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[index(self.shape, x, y, z)]
    }

    /// Axes with lines of at least two pixels.
    pub fn axes(&self) -> Vec<Axis> {
        Axis::ALL.into_iter().filter(|&a| line_len(self.shape, a) >= 2).collect()
    }

    pub fn line_count(&self, axis: Axis) -> usize {
        line_count(self.shape, axis)
    }

    pub fn line(&self, axis: Axis, line: usize) -> Vec<f64> {
        line_indices(self.shape, axis, line).map(|i| self.values[i]).collect()
    }
}

fn check_shape(shape: [usize; 3], len: usize) -> Result<()> {
    if shape.contains(&0) || shape.iter().product::<usize>() != len {
        return Err(Error::Shape(format!("shape {shape:?} does not hold {len} values")));
    }
    Ok(())
}

fn index(shape: [usize; 3], x: usize, y: usize, z: usize) -> usize {
    x + shape[0] * (y + shape[1] * z)
}

pub(crate) fn line_len(shape: [usize; 3], axis: Axis) -> usize {
    match axis {
        Axis::Row => shape[0],
        Axis::Column => shape[1],
        Axis::Depth => shape[2],
    }
}

pub(crate) fn line_count(shape: [usize; 3], axis: Axis) -> usize {
    shape.iter().product::<usize>() / line_len(shape, axis)
}

/// Flat indices of the pixels on `line`, in order along `axis`.
pub(crate) fn line_indices(shape: [usize; 3], axis: Axis, line: usize) -> impl Iterator<Item = usize> {
    let [w, h, _] = shape;
    let (start, step) = match axis {
        Axis::Row => (line * w, 1),
        // line = x + w*z
        Axis::Column => ((line % w) + w * h * (line / w), w),
        // line = x + w*y
        Axis::Depth => (line, w * h),
    };
    (0..line_len(shape, axis)).map(move |k| start + k * step)
}

/// Nonnegative edge magnitudes on an image grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    shape: [usize; 3],
    values: Vec<f64>,
}

impl EdgeMap {
    pub fn new(shape: [usize; 3], values: Vec<f64>) -> Result<Self> {
        check_shape(shape, values.len())?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("edge magnitude {v} is not finite and nonnegative")));
        }
        Ok(EdgeMap { shape, values })
    }

    pub fn zeros(shape: [usize; 3]) -> Self {
        EdgeMap { shape, values: vec![0.0; shape.iter().product()] }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[index(self.shape, x, y, z)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Scaled so the largest value is 1; an all-zero map stays zero.
    pub fn normalized(&self) -> EdgeMap {
        let m = self.max();
        if m == 0.0 {
            return self.clone();
        }
        EdgeMap { shape: self.shape, values: self.values.iter().map(|v| v / m).collect() }
    }

    pub fn max_abs_diff(&self, other: &EdgeMap) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Pointwise maximum of the per-axis maps, normalized to [0, 1].
pub fn combine_axes(maps: &[EdgeMap]) -> Result<EdgeMap> {
    let first = maps.first().ok_or_else(|| Error::Shape("no edge maps to combine".into()))?;
    let mut values = first.values.clone();
    for m in &maps[1..] {
        if m.shape != first.shape {
            return Err(Error::Shape(format!("edge map shapes {:?} and {:?} differ", first.shape, m.shape)));
        }
        for (v, &w) in values.iter_mut().zip(&m.values) {
            *v = v.max(w);
        }
    }
    Ok(EdgeMap { shape: first.shape, values }.normalized())
}

/// 1 where `value >= t`, else 0. With `t = 0` every pixel passes.
pub fn threshold(map: &EdgeMap, t: f64) -> Result<EdgeMap> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("threshold {t} outside [0, 1]")));
    }
    let values = map.values.iter().map(|&v| if v >= t { 1.0 } else { 0.0 }).collect();
    Ok(EdgeMap { shape: map.shape, values })
}
