use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, DecrementVariant, GateKind};
use crate::error::{Error, Result};

pub const METRICS_CSV_HEADER: &str = "variant,n_encode,cut,seed,depth,cx_count,gate_count,fidelity";

/// Which QHED construction a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// MCX-chain decrement.
    Original,
    /// Ancilla decrement (QHED^M).
    Modified,
}

impl Variant {
    pub fn decrement(self) -> DecrementVariant {
        match self {
            Variant::Original => DecrementVariant::Mcx,
            Variant::Modified => DecrementVariant::Ancilla,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Modified => "modified",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Variant::Original),
            "modified" => Ok(Variant::Modified),
            other => Err(Error::Config(format!("unknown variant `{other}` (original|modified)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub depth: usize,
    pub cx_count: usize,
    pub gate_count: usize,
}

/// Depth under an as-soon-as-possible schedule where each gate takes one
/// step on all of its wires, plus two-qubit and total gate counts.
pub fn compute_metrics(circuit: &Circuit) -> Result<CircuitMetrics> {
    let mut level = vec![0usize; circuit.n_qubits()];
    let mut cx_count = 0;
    for g in circuit.gates() {
        match g.width() {
            1 => {}
            2 if g.kind() == GateKind::CX => cx_count += 1,
            _ => return Err(Error::Precondition(format!("metrics need a lowered circuit, found {g}"))),
        }
        let start = g.wires().map(|w| level[w]).max().unwrap_or(0);
        for w in g.wires() {
            level[w] = start + 1;
        }
    }
    Ok(CircuitMetrics { depth: level.into_iter().max().unwrap_or(0), cx_count, gate_count: circuit.len() })
}

/// One benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub variant: Variant,
    pub n_encode: usize,
    pub cut: bool,
    pub seed: u64,
    pub depth: usize,
    pub cx_count: usize,
    pub gate_count: usize,
    /// Blank in CSV when the point was too wide to simulate with noise.
    pub fidelity: Option<f64>,
    /// Why the fidelity is missing, if it is. Not part of the CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MetricsRecord {
    pub fn csv_row(&self) -> String {
        let fidelity = self.fidelity.map(|f| format!("{f:.12}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.variant.name(),
            self.n_encode,
            self.cut,
            self.seed,
            self.depth,
            self.cx_count,
            self.gate_count,
            fidelity
        )
    }

    /// Header plus one LF-terminated line per record.
    pub fn to_csv(records: &[MetricsRecord]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{METRICS_CSV_HEADER}");
        for r in records {
            let _ = writeln!(out, "{}", r.csv_row());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_qhed, Gate};
    use crate::transpile::{transpile, McxStrategy};

    #[test]
    fn depth_examples() {
        let c = Circuit::with_gates(2, vec![Gate::h(0), Gate::h(1)]).unwrap();
        assert_eq!(compute_metrics(&c).unwrap(), CircuitMetrics { depth: 1, cx_count: 0, gate_count: 2 });
        let c = Circuit::with_gates(3, vec![Gate::cx(0, 1), Gate::cx(1, 2)]).unwrap();
        assert_eq!(compute_metrics(&c).unwrap(), CircuitMetrics { depth: 2, cx_count: 2, gate_count: 2 });
    }

    #[test]
    fn unlowered_is_rejected() {
        let c = Circuit::with_gates(3, vec![Gate::toffoli(0, 1, 2)]).unwrap();
        assert!(matches!(compute_metrics(&c), Err(Error::Precondition(_))));
        let c = Circuit::with_gates(2, vec![Gate::cz(0, 1)]).unwrap();
        assert!(compute_metrics(&c).is_err());
    }

    #[test]
    fn modified_qhed_is_cheaper() {
        let metrics = |v: Variant| {
            let (c, _) = build_qhed(5, v.decrement()).unwrap();
            compute_metrics(&transpile(&c, McxStrategy::GrayCode).unwrap()).unwrap()
        };
        let (orig, modi) = (metrics(Variant::Original), metrics(Variant::Modified));
        assert!(modi.cx_count * 5 <= orig.cx_count, "{orig:?} {modi:?}");
        assert!(modi.depth <= orig.depth, "{orig:?} {modi:?}");
        assert!(orig.depth <= orig.gate_count && orig.cx_count <= orig.gate_count);
    }

    #[test]
    fn csv_layout() {
        let r = MetricsRecord {
            variant: Variant::Modified,
            n_encode: 3,
            cut: false,
            seed: 7,
            depth: 10,
            cx_count: 8,
            gate_count: 20,
            fidelity: None,
            note: Some("too wide".into()),
        };
        assert_eq!(MetricsRecord::to_csv(&[r]), format!("{METRICS_CSV_HEADER}\nmodified,3,false,7,10,8,20,\n"));
    }
}
