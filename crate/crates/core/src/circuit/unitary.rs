use num_complex::Complex64 as C64;

use super::Circuit;
use crate::error::{Error, Result};
use crate::sim::{QuantumState, Statevector};

pub const MAX_UNITARY_WIDTH: usize = 10;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        ComplexMatrix { dim, data: rows.iter().flatten().copied().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.set(c, r, self.get(r, c).conj());
            }
        }
        m
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    m.data[r * n + c] += a * other.get(k, c);
                }
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Block acting on the subspace where every wire at or above `n_low`
    /// is |0⟩ (ancillas sit above the data register).
    pub fn restrict_low(&self, n_low: usize) -> Self {
        let dim = 1usize << n_low;
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.set(r, c, self.get(r, c));
            }
        }
        m
    }
}

/// The circuit's unitary, one basis-state run per column.
pub fn circuit_unitary(circuit: &Circuit) -> Result<ComplexMatrix> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_WIDTH {
        return Err(Error::Resource(format!("unitary of a {n}-qubit circuit (limit {MAX_UNITARY_WIDTH})")));
    }
    if n == 0 {
        return Ok(ComplexMatrix::identity(1));
    }
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let mut s = Statevector::basis(n, col)?;
        s.run(circuit)?;
        for (row, a) in s.amplitudes().iter().enumerate() {
            m.set(row, col, *a);
        }
    }
    Ok(m)
}
