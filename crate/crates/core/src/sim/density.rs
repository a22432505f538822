use num_complex::Complex64 as C64;

use super::{check_gate, kernels, QuantumState, Statevector};
use crate::circuit::Gate;
use crate::error::{Error, Result};

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Dense density matrix. Entries are stored row-major, which makes the
/// flat index `(row << n) | col`: the column occupies the low `n` bits and
/// the row the high `n` bits, so `UρU†` is `U` on the row bits followed by
/// `conj(U)` on the column bits of a `2n`-wire vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &Statevector) -> Self {
        let a = state.amplitudes();
        let dim = a.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(a[r] * a[c].conj());
            }
        }
        DensityMatrix { n_qubits: state.n_qubits(), entries }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { n_qubits, entries }
    }

    /// Validates Hermiticity and unit trace. Positivity is checked where it
    /// matters (fidelity) since it needs an eigendecomposition.
    pub fn from_entries(n_qubits: usize, entries: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!("{} entries for dimension {dim}", entries.len())));
        }
        let rho = DensityMatrix { n_qubits, entries };
        if !rho.is_hermitian(HERMITIAN_TOLERANCE) {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOLERANCE || tr.im.abs() > HERMITIAN_TOLERANCE {
            return Err(Error::Domain(format!("density matrix trace is {tr}")));
        }
        Ok(rho)
    }

    /// ρ ⊗ |0⟩⟨0| with the new wire as the most significant bit.
    pub(crate) fn with_zero_wire(&self) -> DensityMatrix {
        let (n, dim) = (self.n_qubits, self.dim());
        let mut entries = vec![C64::new(0.0, 0.0); 4 * dim * dim];
        for r in 0..dim {
            entries[r * 2 * dim..r * 2 * dim + dim].copy_from_slice(&self.entries[r * dim..(r + 1) * dim]);
        }
        DensityMatrix { n_qubits: n + 1, entries }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let dim = self.dim();
        (0..dim).all(|r| (r..dim).all(|c| (self.entry(r, c) - self.entry(c, r).conj()).norm() <= tol))
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn expectation_pure(&self, psi: &Statevector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::Shape("state and density matrix widths differ".into()));
        }
        let a = psi.amplitudes();
        let dim = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..dim {
            if a[r] == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.entries[r * dim..(r + 1) * dim];
            let s: C64 = row.iter().zip(a).map(|(e, b)| e * b).sum();
            acc += a[r].conj() * s;
        }
        Ok(acc.re)
    }

    /// Reduced state on `keep` (in that order: `keep[0]` becomes wire 0).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        if keep.iter().any(|&w| w >= n) {
            return Err(Error::Shape("kept wire out of range".into()));
        }
        for (i, w) in keep.iter().enumerate() {
            if keep[..i].contains(w) {
                return Err(Error::Shape(format!("wire {w} kept twice")));
            }
        }
        let traced: Vec<usize> = (0..n).filter(|w| !keep.contains(w)).collect();
        let k = keep.len();
        let kdim = 1usize << k;
        let dim = self.dim();
        let spread = |sub: usize, wires: &[usize]| -> usize {
            wires.iter().enumerate().fold(0, |acc, (i, &w)| acc | (((sub >> i) & 1) << w))
        };
        let keep_idx: Vec<usize> = (0..kdim).map(|s| spread(s, keep)).collect();
        let trace_idx: Vec<usize> = (0..1usize << traced.len()).map(|s| spread(s, &traced)).collect();
        let mut out = vec![C64::new(0.0, 0.0); kdim * kdim];
        for (r, &kr) in keep_idx.iter().enumerate() {
            for (c, &kc) in keep_idx.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &t in &trace_idx {
                    acc += self.entries[(kr | t) * dim + (kc | t)];
                }
                out[r * kdim + c] = acc;
            }
        }
        Ok(DensityMatrix { n_qubits: k, entries: out })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entry(i, i).re).collect()
    }

    /// Largest entrywise deviation.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl QuantumState for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        check_gate(gate, self.n_qubits)?;
        kernels::apply_gate_shifted(&mut self.entries, gate, self.n_qubits, false);
        kernels::apply_gate_shifted(&mut self.entries, gate, 0, true);
        Ok(())
    }

    fn z_probabilities(&self) -> Vec<f64> {
        self.diagonal().into_iter().map(|p| p.max(0.0)).collect()
    }
}
