use num_complex::Complex64 as C64;

use super::{run_qhed_pipeline, PipelineReport, RunConfig};
use crate::circuit::build_qft;
use crate::error::{Error, Result};
use crate::imaging::{Axis, ImageVolume};
use crate::sim::{run_circuit, Statevector};

#[derive(Debug, Clone)]
pub struct KspaceReport {
    /// IQFT magnitudes, one image row per k-space row.
    pub image: ImageVolume,
    pub report: PipelineReport,
}

/// Image rows from k-space rows: each row is loaded as amplitudes, sent
/// through the IQFT (with output swaps) and read back as magnitudes scaled
/// by the row norm. A row produced by the unitary transform
/// `X_k = N^{-1/2} Σ_j x_j e^{2πi·jk/N}` comes back as `|x_j|`.
pub fn recover_rows(rows: &[Vec<C64>]) -> Result<Vec<Vec<f64>>> {
    let len = rows.first().map_or(0, Vec::len);
    if len < 2 || !len.is_power_of_two() || rows.iter().any(|r| r.len() != len) {
        return Err(Error::Shape(format!("k-space rows must share a power-of-two length ≥ 2, got {len}")));
    }
    let iqft = build_qft(len.trailing_zeros() as usize, true, true)?;
    rows.iter()
        .map(|row| {
            let norm = row.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(vec![0.0; len]);
            }
            let out = run_circuit(&Statevector::from_amplitudes(row)?, &iqft)?;
            Ok(out.amplitudes().iter().map(|a| a.norm() * norm).collect())
        })
        .collect()
}

/// [`recover_rows`] followed by the edge pipeline along rows.
pub fn run_kspace_pipeline(rows: &[Vec<C64>], config: &RunConfig) -> Result<KspaceReport> {
    let recovered = recover_rows(rows)?;
    let width = recovered[0].len();
    let image = ImageVolume::new_2d(width, rows.len(), recovered.concat())?;
    let report = run_qhed_pipeline(&image, config, &[Axis::Row])?;
    Ok(KspaceReport { image, report })
}
