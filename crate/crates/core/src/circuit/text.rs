//! Line-oriented circuit format.
//!
//! ```text
//! QUBITS 3
//! ANCILLAS 2
//! GATE H ;0;
//! GATE CX 0;1;
//! GATE RY ;2;0.7853981633974483
//! ```
//!
//! Each `GATE kind controls;targets;angle` line lists comma-separated wire
//! indices; the angle is empty for fixed gates and otherwise printed in
//! shortest round-trip form. `#` starts a comment line.

use std::fmt::Write as _;

use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

pub fn write_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "QUBITS {}", circuit.n_qubits());
    if !circuit.ancillas().is_empty() {
        let _ = writeln!(out, "ANCILLAS {}", join(circuit.ancillas()));
    }
    for g in circuit.gates() {
        let angle = g.angle().map(|a| format!("{a:?}")).unwrap_or_default();
        let _ = writeln!(out, "GATE {} {};{};{}", g.kind(), join(g.controls()), join(g.targets()), angle);
    }
    out
}

fn join(ws: &[usize]) -> String {
    ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (keyword, rest) = line.split_once(' ').unwrap_or((line, ""));
        match keyword {
            "QUBITS" => {
                if circuit.is_some() {
                    return Err(Error::parse(start, "duplicate QUBITS line"));
                }
                let n = rest.trim().parse().map_err(|_| Error::parse(start, "bad qubit count"))?;
                circuit = Some(Circuit::new(n));
            }
            "ANCILLAS" => {
                let c = circuit.as_mut().ok_or_else(|| Error::parse(start, "ANCILLAS before QUBITS"))?;
                let ws = wires(rest.trim(), start)?;
                c.set_ancillas(ws).map_err(|e| Error::parse(start, e.to_string()))?;
            }
            "GATE" => {
                let c = circuit.as_mut().ok_or_else(|| Error::parse(start, "GATE before QUBITS"))?;
                let (kind, fields) = rest.split_once(' ').ok_or_else(|| Error::parse(start, "missing gate fields"))?;
                let kind: GateKind = kind.parse().map_err(|e: Error| Error::parse(start, e.to_string()))?;
                let parts: Vec<&str> = fields.split(';').collect();
                if parts.len() != 3 {
                    return Err(Error::parse(start, "expected controls;targets;angle"));
                }
                let angle = match parts[2].trim() {
                    "" => None,
                    a => Some(a.parse::<f64>().map_err(|_| Error::parse(start, format!("bad angle `{a}`")))?),
                };
                let gate = Gate::new(kind, wires(parts[0], start)?, wires(parts[1], start)?, angle)
                    .map_err(|e| Error::parse(start, e.to_string()))?;
                c.try_push(gate).map_err(|e| Error::parse(start, e.to_string()))?;
            }
            other => return Err(Error::parse(start, format!("unknown keyword `{other}`"))),
        }
    }
    circuit.ok_or_else(|| Error::parse(0, "missing QUBITS line"))
}

fn wires(s: &str, offset: usize) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|w| w.trim().parse::<usize>().map_err(|_| Error::parse(offset, format!("bad wire `{w}`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::circuit::{build_qhed, DecrementVariant};

    #[test]
    fn golden_qhed_n1() {
        let (c, _) = build_qhed(1, DecrementVariant::Mcx).unwrap();
        let text = write_circuit(&c);
        assert_eq!(text, "QUBITS 2\nGATE H ;0;\nGATE X ;0;\nGATE CX 0;1;\nGATE H ;0;\n");
    }

    #[test]
    fn errors_carry_offsets() {
        let err = parse_circuit("QUBITS 2\nGATE CX 0;5;\n").unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 9, .. }), "{err}");
        assert!(parse_circuit("GATE H ;0;\n").is_err());
        assert!(parse_circuit("QUBITS 1\nGATE RY ;0;abc\n").is_err());
        assert!(parse_circuit("QUBITS 1\nFOO\n").is_err());
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        (0..6usize, proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 3), -7.0..7.0f64).prop_map(|(k, w, a)| {
            match k {
                0 => Gate::h(w[0]),
                1 => Gate::ry(w[1], a),
                2 => Gate::cx(w[0], w[2]),
                3 => Gate::cphase(w[2], w[1], a),
                4 => Gate::toffoli(w[0], w[1], w[2]),
                _ => Gate::swap(w[1], w[0]),
            }
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(gates in proptest::collection::vec(arb_gate(4), 0..30)) {
            let c = Circuit::with_gates(4, gates).unwrap();
            let back = parse_circuit(&write_circuit(&c)).unwrap();
            prop_assert_eq!(back.gates(), c.gates());
        }
    }
}
