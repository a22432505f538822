//! Exact dense simulation: statevectors and density matrices, measurement
//! probabilities and seeded shot sampling.
//!
//! Basis index `k` has wire `q` as bit `q`; wire 0 is the LSB.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::rng::SampleRng;

mod density;
pub(crate) mod kernels;
mod statevector;

pub use density::DensityMatrix;
pub(crate) use statevector::power_of_two_exponent;
pub use statevector::{Statevector, NORM_TOLERANCE};

/// Anything a circuit can be run on.
pub trait QuantumState: Clone {
    fn n_qubits(&self) -> usize;

    /// In-place gate application.
    fn apply_gate(&mut self, gate: &Gate) -> Result<()>;

    /// Z-basis outcome probabilities indexed by basis state.
    fn z_probabilities(&self) -> Vec<f64>;

    fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() > self.n_qubits() {
            return Err(Error::Circuit(format!(
                "circuit width {} exceeds state width {}",
                circuit.n_qubits(),
                self.n_qubits()
            )));
        }
        circuit.gates().iter().try_for_each(|g| self.apply_gate(g))
    }
}

pub(crate) fn check_gate(gate: &Gate, n_qubits: usize) -> Result<()> {
    if gate.max_wire() >= n_qubits {
        return Err(Error::Circuit(format!("gate {gate} outside a {n_qubits}-qubit state")));
    }
    Ok(())
}

pub fn prepare_basis_state(n_qubits: usize, index: usize) -> Result<Statevector> {
    Statevector::basis(n_qubits, index)
}

pub fn prepare_from_amplitudes(values: &[C64]) -> Result<Statevector> {
    Statevector::from_amplitudes(values)
}

pub fn apply_gate<S: QuantumState>(state: &S, gate: &Gate) -> Result<S> {
    let mut out = state.clone();
    out.apply_gate(gate)?;
    Ok(out)
}

pub fn run_circuit<S: QuantumState>(state: &S, circuit: &Circuit) -> Result<S> {
    let mut out = state.clone();
    out.run(circuit)?;
    Ok(out)
}

pub fn z_probabilities<S: QuantumState>(state: &S) -> Vec<f64> {
    state.z_probabilities()
}

/// Draws `shots` outcomes from the state's Z distribution.
pub fn sample_counts<S: QuantumState>(state: &S, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
    sample_distribution(&state.z_probabilities(), shots, seed)
}

/// Inverse-CDF sampling of a probability vector with [`SampleRng`]; one
/// uniform draw per shot, so counts are a pure function of the inputs.
pub fn sample_distribution(probabilities: &[f64], shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0;
    for &p in probabilities {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    if acc <= 0.0 {
        return Err(Error::Domain("cannot sample from an all-zero distribution".into()));
    }
    let mut rng = SampleRng::new(seed);
    let mut counts = BTreeMap::new();
    let last_nonzero = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for _ in 0..shots {
        let u = rng.uniform() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(last_nonzero);
        *counts.entry(k).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Normalized frequencies as a dense vector of length `dim`.
pub fn counts_to_probabilities(counts: &BTreeMap<usize, u64>, dim: usize) -> Vec<f64> {
    let total: u64 = counts.values().sum();
    let mut p = vec![0.0; dim];
    for (&k, &c) in counts {
        p[k] = c as f64 / total as f64;
    }
    p
}

/// `Σ_k p_k · observable_k` for an observable diagonal in the Z basis.
pub fn expectation_diagonal<S: QuantumState>(state: &S, observable: &[f64]) -> Result<f64> {
    let p = state.z_probabilities();
    if p.len() != observable.len() {
        return Err(Error::Shape(format!(
            "observable has {} entries, state dimension is {}",
            observable.len(),
            p.len()
        )));
    }
    Ok(p.iter().zip(observable).map(|(a, b)| a * b).sum())
}

/// Sums `probabilities` onto the wires in `keep` (`keep[0]` becomes bit 0).
pub fn marginal(probabilities: &[f64], keep: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << keep.len()];
    for (k, &p) in probabilities.iter().enumerate() {
        let idx = keep.iter().enumerate().fold(0, |acc, (i, &w)| acc | (((k >> w) & 1) << i));
        out[idx] += p;
    }
    out
}
