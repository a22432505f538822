//! Circuit IR and the builders for every circuit the edge detector uses:
//! amplitude encoding, both decrement permutations, QHED / QHED^M, and the
//! (inverse) quantum Fourier transform.
//!
//! Wire 0 is the least significant bit of every basis index.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

mod builders;
mod gate;
mod qft;
mod text;
mod unitary;

pub use builders::{
    build_decrement_ancilla, build_decrement_mcx, build_encoding_circuit, build_qhed, DecrementVariant, RegisterLayout,
};
pub use gate::{Gate, GateKind, Mat2};
pub use qft::build_qft;
pub use text::{parse_circuit, write_circuit};
pub use unitary::{circuit_unitary, ComplexMatrix, MAX_UNITARY_WIDTH};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    /// Wires promised to hold |0⟩ at the start and end of the circuit and
    /// at every multi-controlled gate that does not touch them.
    ancillas: Vec<usize>,
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, ..Default::default() }
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits);
        for g in gates {
            c.try_push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn ancillas(&self) -> &[usize] {
        &self.ancillas
    }

    pub fn set_ancillas(&mut self, wires: Vec<usize>) -> Result<()> {
        if let Some(&w) = wires.iter().find(|&&w| w >= self.n_qubits) {
            return Err(Error::Circuit(format!("ancilla wire {w} out of range")));
        }
        self.ancillas = wires;
        Ok(())
    }

    pub fn try_push(&mut self, gate: Gate) -> Result<()> {
        if gate.max_wire() >= self.n_qubits {
            return Err(Error::Circuit(format!("gate {gate} exceeds circuit width {}", self.n_qubits)));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Panics on an out-of-range wire; builders only.
    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.try_push(gate).expect("gate outside circuit");
        self
    }

    /// Appends `other` with its wire `i` placed on `wire_map[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, wire_map: &[usize]) -> Result<()> {
        if wire_map.len() < other.n_qubits {
            return Err(Error::Circuit("wire map shorter than appended circuit".into()));
        }
        for g in &other.gates {
            self.try_push(g.remap(|w| wire_map[w]))?;
        }
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        let ident: Vec<usize> = (0..other.n_qubits).collect();
        self.append_mapped(other, &ident)
    }

    /// Same gates on a wider register.
    pub fn widened(&self, n_qubits: usize) -> Result<Circuit> {
        if n_qubits < self.n_qubits {
            return Err(Error::Circuit("cannot narrow a circuit".into()));
        }
        let mut c = self.clone();
        c.n_qubits = n_qubits;
        Ok(c)
    }

    pub fn inverse(&self) -> Circuit {
        let mut c = self.clone();
        c.gates = self.gates.iter().rev().map(Gate::inverse).collect();
        c
    }

    /// Copy with the gate list replaced; keeps width, ancillas and labels.
    pub fn with_gate_list(&self, gates: Vec<Gate>) -> Circuit {
        Circuit { n_qubits: self.n_qubits, gates, ancillas: self.ancillas.clone(), metadata: self.metadata.clone() }
    }

    pub fn label(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}
