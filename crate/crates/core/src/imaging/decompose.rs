use std::ops::Range;

use num_complex::Complex64 as C64;

use super::{line_indices, line_len, Axis, EdgeMap, ImageVolume};
use crate::error::{Error, Result};

/// One buffered window of a line, in padded-line coordinates.
///
/// The padded line is the line with its first and last pixel replicated
/// once at each end (and, for lines shorter than a window, the last pixel
/// replicated until a full window fits). Difference `k` of a window is
/// between its pixels `k` and `k + 1`; `k = window_size - 1` is the wrap.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub line: usize,
    pub offset: usize,
    /// Original-line pair indices this window reports (pair `i` is pixels
    /// `i`, `i + 1`).
    pub payload: Range<usize>,
    /// `true` for differences dropped on reassembly: the wrap, pairs
    /// touching buffer pixels and pairs already owned by an earlier window.
    pub discard: Vec<bool>,
    /// Raw intensities, before normalization.
    pub values: Vec<f64>,
    pub norm: f64,
    /// Constant window (all-zero included): every difference is 0, so its
    /// edges are forced to 0 whatever the evaluation returns.
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainPlan {
    pub axis: Axis,
    pub shape: [usize; 3],
    pub n_encode: usize,
    pub window_size: usize,
    pub line_len: usize,
    pub lines: usize,
    /// Line-major.
    pub windows: Vec<Window>,
}

impl SubdomainPlan {
    pub fn windows_per_line(&self) -> usize {
        self.windows.len() / self.lines
    }

    pub fn norms(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.norm).collect()
    }
}

/// Offsets of windows of `size` over a padded line of `padded` pixels.
fn window_offsets(padded: usize, size: usize) -> Vec<usize> {
    let stride = size - 2;
    let mut out = Vec::new();
    let mut o = 0;
    while o + size < padded {
        out.push(o);
        o += stride;
    }
    let last = padded - size;
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

pub fn plan_decomposition(image: &ImageVolume, axis: Axis, n_encode: usize) -> Result<SubdomainPlan> {
    if !(2..=20).contains(&n_encode) {
        return Err(Error::Planning(format!("n_encode {n_encode} outside 2..=20")));
    }
    let shape = image.shape();
    let len = line_len(shape, axis);
    if len < 2 {
        return Err(Error::Planning(format!("{axis} lines have {len} pixel(s); need at least 2")));
    }
    let size = 1usize << n_encode;
    let lines = image.line_count(axis);
    let mut windows = Vec::new();
    for line in 0..lines {
        let raw = image.line(axis, line);
        let mut padded = Vec::with_capacity(len + 2);
        padded.push(raw[0]);
        padded.extend_from_slice(&raw);
        padded.push(raw[len - 1]);
        while padded.len() < size {
            padded.push(raw[len - 1]);
        }
        let mut next = 0;
        for offset in window_offsets(padded.len(), size) {
            // padded pair j covers original pair j - 1, for 1 <= j <= len - 1
            let lo = offset.max(1) - 1;
            let hi = (offset + size - 2).min(len - 1);
            let payload = lo.max(next)..hi.max(lo.max(next));
            next = next.max(hi);
            let discard = (0..size)
                .map(|k| {
                    let j = offset + k;
                    !(k + 1 < size && j >= 1 && payload.contains(&(j - 1)))
                })
                .collect();
            let values = padded[offset..offset + size].to_vec();
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            let flat = values.iter().all(|&v| v == values[0]);
            windows.push(Window { line, offset, payload, discard, values, norm, flat });
        }
    }
    Ok(SubdomainPlan { axis, shape, n_encode, window_size: size, line_len: len, lines, windows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedWindow {
    /// Unit-norm amplitudes; uniform for an all-zero window.
    pub amplitudes: Vec<f64>,
    pub norm: f64,
    pub flat: bool,
}

pub fn encode_window(plan: &SubdomainPlan, window: usize) -> Result<EncodedWindow> {
    let w = plan
        .windows
        .get(window)
        .ok_or_else(|| Error::Planning(format!("window {window} out of range ({})", plan.windows.len())))?;
    let amplitudes = if w.norm == 0.0 {
        vec![1.0 / (plan.window_size as f64).sqrt(); plan.window_size]
    } else {
        w.values.iter().map(|v| v / w.norm).collect()
    };
    Ok(EncodedWindow { amplitudes, norm: w.norm, flat: w.flat })
}

/// `2·norm·√p(2k+1)` for each `k`: unsigned adjacent differences in pixel
/// units, the last one being the wrap.
pub fn window_edges_from_probabilities(probabilities: &[f64], norm: f64) -> Vec<f64> {
    probabilities.chunks(2).map(|p| 2.0 * norm * p.get(1).copied().unwrap_or(0.0).max(0.0).sqrt()).collect()
}

/// Signed form, `2·norm·Re a(2k+1) = x_k − x_{k+1}`.
pub fn window_edges_from_amplitudes(amplitudes: &[C64], norm: f64) -> Vec<f64> {
    amplitudes.chunks(2).map(|a| 2.0 * norm * a.get(1).map_or(0.0, |v| v.re)).collect()
}

/// Per-line signed differences, `line_len` long with a trailing 0. Flat
/// windows contribute zeros.
pub fn reassemble_lines(plan: &SubdomainPlan, edges: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if edges.len() != plan.windows.len() {
        return Err(Error::Aggregation(format!("{} window results for {} windows", edges.len(), plan.windows.len())));
    }
    let mut lines = vec![vec![0.0; plan.line_len]; plan.lines];
    for (id, (w, e)) in plan.windows.iter().zip(edges).enumerate() {
        if e.len() < plan.window_size - 1 {
            return Err(Error::Aggregation(format!("window {id} has {} differences", e.len())));
        }
        if w.flat {
            continue;
        }
        for i in w.payload.clone() {
            lines[w.line][i] = e[i + 1 - w.offset];
        }
    }
    Ok(lines)
}

/// Magnitudes of [`reassemble_lines`] placed on the image grid; the
/// difference between pixels `i` and `i + 1` lands on pixel `i`.
pub fn reassemble(plan: &SubdomainPlan, edges: &[Vec<f64>]) -> Result<EdgeMap> {
    let lines = reassemble_lines(plan, edges)?;
    let mut values = vec![0.0; plan.shape.iter().product()];
    for (id, line) in lines.iter().enumerate() {
        for (i, v) in line_indices(plan.shape, plan.axis, id).zip(line) {
            values[i] = v.abs();
        }
    }
    EdgeMap::new(plan.shape, values)
}
