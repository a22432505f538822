use std::f64::consts::PI;

use crate::circuit::{Circuit, Gate, GateKind};

const ANGLE_TOLERANCE: f64 = 1e-12;

/// Cancels self-inverse pairs and merges rotations that meet on exactly
/// the same wires, repeating until nothing changes.
///
/// RY is dropped only at multiples of 4π (RY(2π) = −I); Phase and CPhase
/// at multiples of 2π. The unitary is preserved exactly.
pub fn peephole_optimize(circuit: &Circuit) -> Circuit {
    let mut gates = circuit.gates().to_vec();
    loop {
        let next = pass(&gates);
        if next == gates {
            return circuit.with_gate_list(next);
        }
        gates = next;
    }
}

fn pass(gates: &[Gate]) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    for g in gates {
        if is_identity(g) {
            continue;
        }
        let prev = out.iter().rposition(|p| p.wires().any(|w| g.touches(w)));
        if let Some(i) = prev {
            let p = &out[i];
            if p.is_self_inverse() && p == g && p.width() == g.width() {
                out.remove(i);
                continue;
            }
            if let Some(merged) = merge(p, g) {
                if is_identity(&merged) {
                    out.remove(i);
                } else {
                    out[i] = merged;
                }
                continue;
            }
        }
        out.push(g.clone());
    }
    out
}

fn merge(a: &Gate, b: &Gate) -> Option<Gate> {
    if a.kind() != b.kind() || !a.kind().has_angle() {
        return None;
    }
    let sum = a.angle()? + b.angle()?;
    match a.kind() {
        GateKind::RY | GateKind::Phase if a.targets() == b.targets() => {
            Gate::new(a.kind(), vec![], a.targets().to_vec(), Some(sum)).ok()
        }
        // controlled phase is symmetric in its two wires
        GateKind::CPhase => {
            let same = (a.controls() == b.controls() && a.targets() == b.targets())
                || (a.controls() == b.targets() && a.targets() == b.controls());
            same.then(|| Gate::cphase(a.controls()[0], a.targets()[0], sum))
        }
        _ => None,
    }
}

fn is_identity(g: &Gate) -> bool {
    let period = match g.kind() {
        GateKind::RY => 4.0 * PI,
        GateKind::Phase | GateKind::CPhase => 2.0 * PI,
        _ => return false,
    };
    let a = g.angle().unwrap_or(0.0).rem_euclid(period);
    a < ANGLE_TOLERANCE || period - a < ANGLE_TOLERANCE
}
