use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A 2x2 complex matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    RY,
    Phase,
    CX,
    CZ,
    CPhase,
    Toffoli,
    MCX,
    SWAP,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::RY => "RY",
            GateKind::Phase => "Phase",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::CPhase => "CPhase",
            GateKind::Toffoli => "Toffoli",
            GateKind::MCX => "MCX",
            GateKind::SWAP => "SWAP",
        }
    }

    pub fn has_angle(self) -> bool {
        matches!(self, GateKind::RY | GateKind::Phase | GateKind::CPhase)
    }

    fn arity(self) -> Option<(usize, usize)> {
        // (controls, targets); MCX is variable.
        match self {
            GateKind::H | GateKind::X | GateKind::RY | GateKind::Phase => Some((0, 1)),
            GateKind::CX | GateKind::CZ | GateKind::CPhase => Some((1, 1)),
            GateKind::Toffoli => Some((2, 1)),
            GateKind::SWAP => Some((0, 2)),
            GateKind::MCX => None,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "RY" => GateKind::RY,
            "Phase" => GateKind::Phase,
            "CX" => GateKind::CX,
            "CZ" => GateKind::CZ,
            "CPhase" => GateKind::CPhase,
            "Toffoli" => GateKind::Toffoli,
            "MCX" => GateKind::MCX,
            "SWAP" => GateKind::SWAP,
            other => return Err(Error::Circuit(format!("unknown gate kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    controls: Vec<usize>,
    targets: Vec<usize>,
    angle: Option<f64>,
}

impl Gate {
    /// Generic constructor with shape checks. Multi-controlled X gates with
    /// fewer than three controls are normalized to X / CX / Toffoli.
    pub fn new(kind: GateKind, controls: Vec<usize>, targets: Vec<usize>, angle: Option<f64>) -> Result<Self> {
        let kind = if kind == GateKind::MCX {
            match controls.len() {
                0 => GateKind::X,
                1 => GateKind::CX,
                2 => GateKind::Toffoli,
                _ => GateKind::MCX,
            }
        } else {
            kind
        };
        match kind.arity() {
            Some((c, t)) if c != controls.len() || t != targets.len() => {
                return Err(Error::Circuit(format!(
                    "{kind} takes {c} control(s) and {t} target(s), got {} and {}",
                    controls.len(),
                    targets.len()
                )))
            }
            None if targets.len() != 1 => return Err(Error::Circuit("MCX takes exactly one target".into())),
            _ => {}
        }
        if kind.has_angle() != angle.is_some() {
            return Err(Error::Circuit(format!("angle mismatch for {kind}")));
        }
        if let Some(a) = angle {
            if !a.is_finite() {
                return Err(Error::Circuit(format!("non-finite angle for {kind}")));
            }
        }
        let gate = Gate { kind, controls, targets, angle };
        let wires: Vec<usize> = gate.wires().collect();
        for (i, w) in wires.iter().enumerate() {
            if wires[..i].contains(w) {
                return Err(Error::Circuit(format!("wire {w} used twice in {kind}")));
            }
        }
        Ok(gate)
    }

    fn raw(kind: GateKind, controls: Vec<usize>, targets: Vec<usize>, angle: Option<f64>) -> Self {
        Gate::new(kind, controls, targets, angle).expect("invalid gate")
    }

    pub fn h(q: usize) -> Self {
        Self::raw(GateKind::H, vec![], vec![q], None)
    }

    pub fn x(q: usize) -> Self {
        Self::raw(GateKind::X, vec![], vec![q], None)
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Self::raw(GateKind::RY, vec![], vec![q], Some(theta))
    }

    pub fn phase(q: usize, theta: f64) -> Self {
        Self::raw(GateKind::Phase, vec![], vec![q], Some(theta))
    }

    /// Panics if `control == target`.
    pub fn cx(control: usize, target: usize) -> Self {
        Self::raw(GateKind::CX, vec![control], vec![target], None)
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self::raw(GateKind::CZ, vec![control], vec![target], None)
    }

    pub fn cphase(control: usize, target: usize, theta: f64) -> Self {
        Self::raw(GateKind::CPhase, vec![control], vec![target], Some(theta))
    }

    pub fn toffoli(c0: usize, c1: usize, target: usize) -> Self {
        Self::raw(GateKind::Toffoli, vec![c0, c1], vec![target], None)
    }

    pub fn mcx(controls: &[usize], target: usize) -> Self {
        Self::raw(GateKind::MCX, controls.to_vec(), vec![target], None)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::raw(GateKind::SWAP, vec![], vec![a, b], None)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn controls(&self) -> &[usize] {
        &self.controls
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    /// Controls first, then targets.
    pub fn wires(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(self.targets.iter()).copied()
    }

    pub fn width(&self) -> usize {
        self.controls.len() + self.targets.len()
    }

    pub fn max_wire(&self) -> usize {
        self.wires().max().unwrap_or(0)
    }

    pub fn touches(&self, wire: usize) -> bool {
        self.wires().any(|w| w == wire)
    }

    /// Same gate with every wire passed through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind,
            controls: self.controls.iter().map(|&w| map(w)).collect(),
            targets: self.targets.iter().map(|&w| map(w)).collect(),
            angle: self.angle,
        }
    }

    /// True when the gate acts diagonally in the computational basis of
    /// `wire` (the wire is a control, or the gate is a phase on it).
    pub fn is_diagonal_on(&self, wire: usize) -> bool {
        if self.controls.contains(&wire) {
            return true;
        }
        self.targets.contains(&wire) && matches!(self.kind, GateKind::Phase | GateKind::CZ | GateKind::CPhase)
    }

    pub fn is_self_inverse(&self) -> bool {
        matches!(
            self.kind,
            GateKind::H
                | GateKind::X
                | GateKind::CX
                | GateKind::CZ
                | GateKind::Toffoli
                | GateKind::MCX
                | GateKind::SWAP
        )
    }

    pub fn inverse(&self) -> Gate {
        let mut g = self.clone();
        g.angle = self.angle.map(|a| -a);
        g
    }

    /// The single-target 2x2 block applied when every control is |1⟩.
    /// `None` for SWAP, the only gate that is not of that form.
    pub fn target_matrix(&self) -> Option<Mat2> {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        Some(match self.kind {
            GateKind::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            GateKind::X | GateKind::CX | GateKind::Toffoli | GateKind::MCX => [[zero, one], [one, zero]],
            GateKind::CZ => [[one, zero], [zero, -one]],
            GateKind::RY => {
                let t = self.angle.unwrap_or(0.0) / 2.0;
                let (s, c) = t.sin_cos();
                [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
            }
            GateKind::Phase | GateKind::CPhase => {
                [[one, zero], [zero, C64::from_polar(1.0, self.angle.unwrap_or(0.0))]]
            }
            GateKind::SWAP => return None,
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(a) = self.angle {
            write!(f, "({a})")?;
        }
        let ws: Vec<String> = self.wires().map(|w| w.to_string()).collect();
        write!(f, " {}", ws.join(","))
    }
}
