use num_complex::Complex64 as C64;

use super::{check_gate, kernels, QuantumState};
use crate::circuit::Gate;
use crate::error::{Error, Result};

/// Dense pure state over `n_qubits` wires, wire 0 the least significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

pub const NORM_TOLERANCE: f64 = 1e-10;

impl Statevector {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Domain("a state needs at least one qubit".into()));
        }
        if n_qubits >= usize::BITS as usize - 1 {
            return Err(Error::Resource(format!("{n_qubits} qubits")));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amplitudes })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Normalizes arbitrary complex values into a state.
    pub fn from_amplitudes(values: &[C64]) -> Result<Self> {
        let n = power_of_two_exponent(values.len())?;
        let norm = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization);
        }
        let amplitudes = values.iter().map(|v| v / norm).collect();
        Ok(Statevector { n_qubits: n, amplitudes })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        let c: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::from_amplitudes(&c)
    }

    /// Takes amplitudes that are already normalized (within tolerance).
    pub fn from_normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = power_of_two_exponent(amplitudes.len())?;
        let norm2: f64 = amplitudes.iter().map(|v| v.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("state norm² is {norm2}, expected 1")));
        }
        Ok(Statevector { n_qubits: n, amplitudes })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Statevector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("inner product of different widths".into()));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// |self⟩ ⊗ |other⟩ with `other` on the low wires.
    pub fn tensor(&self, low: &Statevector) -> Statevector {
        let mut amplitudes = Vec::with_capacity(self.dim() * low.dim());
        for a in &self.amplitudes {
            for b in &low.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Statevector { n_qubits: self.n_qubits + low.n_qubits, amplitudes }
    }

    /// Pads with |0⟩ wires above the current register.
    pub fn extended(&self, n_qubits: usize) -> Result<Statevector> {
        if n_qubits < self.n_qubits {
            return Err(Error::Shape("cannot shrink a state".into()));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[..self.dim()].copy_from_slice(&self.amplitudes);
        Ok(Statevector { n_qubits, amplitudes })
    }
}

impl QuantumState for Statevector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        check_gate(gate, self.n_qubits)?;
        kernels::apply_gate_shifted(&mut self.amplitudes, gate, 0, false);
        Ok(())
    }

    fn z_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

pub(crate) fn power_of_two_exponent(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Shape(format!("length {len} is not a power of two ≥ 2")));
    }
    Ok(len.trailing_zeros() as usize)
}
