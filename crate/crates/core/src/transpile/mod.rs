//! Lowering to a {CX, one-qubit} basis, peephole cleanup and the three
//! cost metrics (depth, CX count, gate count).
//!
//! There is no routing: every pair of wires is assumed connected, and the
//! passes are deterministic.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

mod metrics;
mod peephole;

pub use metrics::{compute_metrics, CircuitMetrics, MetricsRecord, Variant, METRICS_CSV_HEADER};
pub use peephole::peephole_optimize;

/// How multi-controlled X gates with three or more controls are expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McxStrategy {
    /// Ancilla-free controlled-phase walk over the Gray code of the
    /// controls; 2^k − 1 controlled phases for k controls.
    GrayCode,
    /// Toffoli V-chain through the circuit's declared clean ancillae.
    VchainAncilla,
}

/// Full lowering: MCX expansion, relative-phase Toffoli pairing, Toffoli
/// and two-qubit gate decomposition, then peephole optimization.
pub fn transpile(circuit: &Circuit, strategy: McxStrategy) -> Result<Circuit> {
    let c = lower_mcx(circuit, strategy)?;
    let c = pair_relative_phase_toffolis(&c);
    let c = lower_toffoli(&c);
    let c = lower_two_qubit(&c);
    Ok(peephole_optimize(&c))
}

fn t(q: usize) -> Gate {
    Gate::phase(q, FRAC_PI_4)
}

fn tdg(q: usize) -> Gate {
    Gate::phase(q, -FRAC_PI_4)
}

fn toffoli_network(a: usize, b: usize, tg: usize) -> [Gate; 15] {
    [
        Gate::h(tg),
        Gate::cx(b, tg),
        tdg(tg),
        Gate::cx(a, tg),
        t(tg),
        Gate::cx(b, tg),
        tdg(tg),
        Gate::cx(a, tg),
        t(b),
        t(tg),
        Gate::h(tg),
        Gate::cx(a, b),
        t(a),
        tdg(b),
        Gate::cx(a, b),
    ]
}

/// Replaces every Toffoli by the standard 6-CX network of H, T and T†.
pub fn lower_toffoli(circuit: &Circuit) -> Circuit {
    let mut out = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        if g.kind() == GateKind::Toffoli {
            let (c, tg) = (g.controls(), g.targets()[0]);
            out.extend(toffoli_network(c[0], c[1], tg));
        } else {
            out.push(g.clone());
        }
    }
    circuit.with_gate_list(out)
}

/// Expands MCX gates with three or more controls.
///
/// `VchainAncilla` borrows declared ancillae that the gate does not touch;
/// a k-control MCX needs k − 2 of them.
pub fn lower_mcx(circuit: &Circuit, strategy: McxStrategy) -> Result<Circuit> {
    let mut out = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        if g.kind() != GateKind::MCX {
            out.push(g.clone());
            continue;
        }
        let (controls, target) = (g.controls(), g.targets()[0]);
        match strategy {
            McxStrategy::GrayCode => {
                out.push(Gate::h(target));
                gray_code_phase(controls, target, PI, &mut out);
                out.push(Gate::h(target));
            }
            McxStrategy::VchainAncilla => {
                let free: Vec<usize> = circuit.ancillas().iter().copied().filter(|&w| !g.touches(w)).collect();
                let k = controls.len();
                if free.len() < k - 2 {
                    return Err(Error::Resource(format!(
                        "MCX with {k} controls needs {} clean ancillae, circuit declares {} free",
                        k - 2,
                        free.len()
                    )));
                }
                vchain(controls, target, &free[..k - 2], &mut out);
            }
        }
    }
    Ok(circuit.with_gate_list(out))
}

/// Phase `theta` on the all-ones state of `controls ∪ {target}`.
///
/// Uses x_1⋯x_k = 2^{1−k} Σ_{S≠∅} (−1)^{|S|+1} ⊕_{i∈S} x_i: each nonempty
/// subset's parity is accumulated on its highest control with CX gates
/// while walking the reflected Gray code, and a controlled phase of
/// ±theta/2^{k−1} from that control to the target applies its term.
fn gray_code_phase(controls: &[usize], target: usize, theta: f64, out: &mut Vec<Gate>) {
    let k = controls.len();
    let step = theta / (1u64 << (k - 1)) as f64;
    let mut prev = 0usize;
    for i in 1usize..1 << k {
        let code = i ^ (i >> 1);
        let lead = (usize::BITS - 1 - code.leading_zeros()) as usize;
        let changed = (code ^ prev).trailing_zeros() as usize;
        if prev != 0 {
            if changed == lead {
                for j in (0..lead).filter(|j| code >> j & 1 == 1) {
                    out.push(Gate::cx(controls[j], controls[lead]));
                }
            } else {
                out.push(Gate::cx(controls[changed], controls[lead]));
            }
        }
        let sign = if code.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        out.push(Gate::cphase(controls[lead], target, sign * step));
        prev = code;
    }
}

fn vchain(controls: &[usize], target: usize, ancillas: &[usize], out: &mut Vec<Gate>) {
    let k = controls.len();
    let mut compute = vec![Gate::toffoli(controls[0], controls[1], ancillas[0])];
    for i in 1..k - 2 {
        compute.push(Gate::toffoli(ancillas[i - 1], controls[i + 1], ancillas[i]));
    }
    out.extend(compute.iter().cloned());
    out.push(Gate::toffoli(ancillas[k - 3], controls[k - 1], target));
    out.extend(compute.into_iter().rev());
}

/// The Margolus gate on (a, b → t): a Toffoli times a diagonal sign, with
/// three CX. The sequence is its own inverse.
fn margolus(a: usize, b: usize, tg: usize) -> [Gate; 7] {
    [
        Gate::ry(tg, FRAC_PI_4),
        Gate::cx(b, tg),
        Gate::ry(tg, FRAC_PI_4),
        Gate::cx(a, tg),
        Gate::ry(tg, -FRAC_PI_4),
        Gate::cx(b, tg),
        Gate::ry(tg, -FRAC_PI_4),
    ]
}

/// Replaces compute/uncompute Toffoli pairs by Margolus gates.
///
/// Two Toffolis on the same wires form a pair when every gate between
/// them acts diagonally on all three wires. The Margolus sign is then a
/// diagonal that commutes through the middle and cancels against its own
/// inverse, so the circuit unitary is unchanged exactly.
pub fn pair_relative_phase_toffolis(circuit: &Circuit) -> Circuit {
    let gates = circuit.gates();
    let mut partner: Vec<Option<usize>> = vec![None; gates.len()];
    for i in 0..gates.len() {
        if gates[i].kind() != GateKind::Toffoli || partner[i].is_some() {
            continue;
        }
        let wires: Vec<usize> = gates[i].wires().collect();
        for j in i + 1..gates.len() {
            let g = &gates[j];
            if g.kind() == GateKind::Toffoli && partner[j].is_none() && same_toffoli(&gates[i], g) {
                partner[i] = Some(j);
                partner[j] = Some(i);
                break;
            }
            if wires.iter().any(|&w| g.touches(w) && !g.is_diagonal_on(w)) {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(gates.len());
    for (g, p) in gates.iter().zip(&partner) {
        match p {
            Some(_) => {
                let (mut a, mut b) = (g.controls()[0], g.controls()[1]);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                out.extend(margolus(a, b, g.targets()[0]));
            }
            None => out.push(g.clone()),
        }
    }
    circuit.with_gate_list(out)
}

fn same_toffoli(a: &Gate, b: &Gate) -> bool {
    let (ca, cb) = (a.controls(), b.controls());
    a.targets() == b.targets() && ((ca[0] == cb[0] && ca[1] == cb[1]) || (ca[0] == cb[1] && ca[1] == cb[0]))
}

/// Rewrites CZ, CPhase and SWAP in terms of CX and one-qubit gates.
pub fn lower_two_qubit(circuit: &Circuit) -> Circuit {
    let mut out = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        match g.kind() {
            GateKind::CZ => {
                let (c, tg) = (g.controls()[0], g.targets()[0]);
                out.extend([Gate::h(tg), Gate::cx(c, tg), Gate::h(tg)]);
            }
            GateKind::CPhase => {
                let (c, tg, th) = (g.controls()[0], g.targets()[0], g.angle().unwrap_or(0.0));
                out.extend([
                    Gate::phase(c, th / 2.0),
                    Gate::cx(c, tg),
                    Gate::phase(tg, -th / 2.0),
                    Gate::cx(c, tg),
                    Gate::phase(tg, th / 2.0),
                ]);
            }
            GateKind::SWAP => {
                let (a, b) = (g.targets()[0], g.targets()[1]);
                out.extend([Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]);
            }
            _ => out.push(g.clone()),
        }
    }
    circuit.with_gate_list(out)
}
