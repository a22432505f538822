//! Depolarizing gate noise and readout bit flips on density matrices, and
//! the fidelity measures used to score noisy runs.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::sim::{DensityMatrix, QuantumState, Statevector};

mod fidelity;

pub use fidelity::{classical_fidelity, fidelity, hermitian_eigenvalues};

/// Widest register `run_noisy` accepts (a 12-wire density matrix is 256 MiB).
pub const DENSITY_MATRIX_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each one-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Bit-flip probability per wire at measurement.
    pub p_readout: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { p1: 3e-4, p2: 1e-2, p_readout: 2e-2 }
    }
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, p_readout: f64) -> Result<Self> {
        let m = NoiseModel { p1, p2, p_readout };
        m.validate()?;
        Ok(m)
    }

    pub fn ideal() -> Self {
        NoiseModel { p1: 0.0, p2: 0.0, p_readout: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_readout", self.p_readout)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name}={p} is not a probability")));
            }
        }
        Ok(())
    }

    /// Parses `key=value` lines (`p1`, `p2`, `p_readout`); `#` comments and
    /// blank lines are skipped, missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = NoiseModel::default();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len();
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::parse(start, "expected key=value"))?;
            let value: f64 =
                value.trim().parse().map_err(|_| Error::parse(start, format!("bad number `{}`", value.trim())))?;
            match key.trim() {
                "p1" => m.p1 = value,
                "p2" => m.p2 = value,
                "p_readout" => m.p_readout = value,
                other => return Err(Error::parse(start, format!("unknown key `{other}`"))),
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_config(&self) -> String {
        format!("p1={:?}\np2={:?}\np_readout={:?}\n", self.p1, self.p2, self.p_readout)
    }
}

/// Bit patterns of `wires` spread into full-register offsets.
fn wire_offsets(wires: &[usize]) -> Vec<usize> {
    (0..1usize << wires.len())
        .map(|s| wires.iter().enumerate().fold(0, |acc, (i, &w)| acc | (((s >> i) & 1) << w)))
        .collect()
}

fn depolarize_in_place(rho: &mut DensityMatrix, wires: &[usize], p: f64) {
    if p == 0.0 || wires.is_empty() {
        return;
    }
    // The uniform average over all 4^k Paulis (identity included) replaces
    // the block on `wires` by I/2^k; mixing it in with weight
    // λ = p·4^k/(4^k−1) equals weight p spread over the non-identity ones.
    let k = wires.len();
    let four_k = (1usize << (2 * k)) as f64;
    let lambda = p * four_k / (four_k - 1.0);
    let mask: usize = wires.iter().map(|w| 1usize << w).sum();
    let offsets = wire_offsets(wires);
    let n = rho.n_qubits();
    let dim = rho.dim();
    let scale = lambda / offsets.len() as f64;
    let keep = 1.0 - lambda;
    let e = rho.entries_mut();
    for r in (0..dim).filter(|r| r & mask == 0) {
        for c in (0..dim).filter(|c| c & mask == 0) {
            let mut sum = C64::new(0.0, 0.0);
            for &o in &offsets {
                sum += e[((r | o) << n) | (c | o)];
            }
            for &orow in &offsets {
                for &ocol in &offsets {
                    e[((r | orow) << n) | (c | ocol)] *= keep;
                }
            }
            for &o in &offsets {
                e[((r | o) << n) | (c | o)] += sum * scale;
            }
        }
    }
}

/// ρ ↦ (1−p)ρ + p/(4^k−1) Σ_{P≠I} PρP† over the Paulis on `wires`.
pub fn apply_depolarizing(rho: &DensityMatrix, wires: &[usize], p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("depolarizing probability {p}")));
    }
    if let Some(&w) = wires.iter().find(|&&w| w >= rho.n_qubits()) {
        return Err(Error::Shape(format!("wire {w} outside a {}-qubit state", rho.n_qubits())));
    }
    let mut out = rho.clone();
    depolarize_in_place(&mut out, wires, p);
    Ok(out)
}

/// ρ ↦ (1−p)ρ + p XρX on `wire`.
fn bit_flip_in_place(rho: &mut DensityMatrix, wire: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    let n = rho.n_qubits();
    let dim = rho.dim();
    let b = 1usize << wire;
    let e = rho.entries_mut();
    for r in (0..dim).filter(|r| r & b == 0) {
        for c in 0..dim {
            let (i00, i11) = ((r << n) | c, ((r | b) << n) | (c ^ b));
            let (a, d) = (e[i00], e[i11]);
            e[i00] = (1.0 - p) * a + p * d;
            e[i11] = (1.0 - p) * d + p * a;
        }
    }
}

/// Local 2^k × 2^k matrix of a gate on its own wires (local bit i is
/// `gate.wires()` entry i), row-major.
fn local_unitary(gate: &Gate) -> (Vec<usize>, Vec<C64>) {
    let wires: Vec<usize> = gate.wires().collect();
    let k = wires.len();
    let local = gate.remap(|w| wires.iter().position(|&x| x == w).unwrap_or(0));
    let d = 1usize << k;
    let mut u = vec![C64::new(0.0, 0.0); d * d];
    for col in 0..d {
        let mut s = Statevector::basis(k, col).expect("basis state");
        s.apply_gate(&local).expect("local gate");
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[row * d + col] = *a;
        }
    }
    (wires, u)
}

/// One pass over ρ applying ρ ↦ (1−λ)·UρU† + λ·tr_W(UρU†) ⊗ I/2^k on the
/// gate's wires W, where λ is the full-twirl weight of depolarizing
/// probability `p` (see [`apply_depolarizing`]).
fn noisy_gate_in_place(rho: &mut DensityMatrix, gate: &Gate, p: f64) {
    let (wires, u) = local_unitary(gate);
    let d = 1usize << wires.len();
    let four_k = (d * d) as f64;
    let lambda = p * four_k / (four_k - 1.0);
    let n = rho.n_qubits();
    match wires.len() {
        1 => {
            let u = [[u[0], u[1]], [u[2], u[3]]];
            step_one(rho.entries_mut(), n, wires[0], &u, lambda)
        }
        2 => {
            let mut m = [C64::new(0.0, 0.0); 16];
            m.copy_from_slice(&u);
            step_two(rho.entries_mut(), n, wires[0], wires[1], &m, lambda)
        }
        _ => unreachable!("lowered circuits have one- and two-qubit gates only"),
    }
}

/// Mutable views of rows `idx` (strictly ascending) of a row-major matrix.
fn rows_mut<const K: usize>(mut e: &mut [C64], dim: usize, idx: [usize; K]) -> [&mut [C64]; K] {
    let mut base = 0;
    let mut out: [&mut [C64]; K] = std::array::from_fn(|_| &mut [][..]);
    for (slot, &r) in out.iter_mut().zip(&idx) {
        let (_, rest) = std::mem::take(&mut e).split_at_mut((r - base) * dim);
        let (row, rest) = rest.split_at_mut(dim);
        *slot = row;
        e = rest;
        base = r + 1;
    }
    out
}

fn step_one(e: &mut [C64], n: usize, q: usize, u: &[[C64; 2]; 2], lambda: f64) {
    let dim = 1usize << n;
    let b = 1usize << q;
    let keep = 1.0 - lambda;
    let mix = lambda / 2.0;
    let ud = [[u[0][0].conj(), u[0][1].conj()], [u[1][0].conj(), u[1][1].conj()]];
    for r in (0..dim).filter(|r| r & b == 0) {
        let [row0, row1] = rows_mut(e, dim, [r, r | b]);
        for c in (0..dim).filter(|c| c & b == 0) {
            let c1 = c | b;
            let m = [[row0[c], row0[c1]], [row1[c], row1[c1]]];
            // t = U m, then t U†
            let t = [
                [u[0][0] * m[0][0] + u[0][1] * m[1][0], u[0][0] * m[0][1] + u[0][1] * m[1][1]],
                [u[1][0] * m[0][0] + u[1][1] * m[1][0], u[1][0] * m[0][1] + u[1][1] * m[1][1]],
            ];
            let mut o = [
                [t[0][0] * ud[0][0] + t[0][1] * ud[0][1], t[0][0] * ud[1][0] + t[0][1] * ud[1][1]],
                [t[1][0] * ud[0][0] + t[1][1] * ud[0][1], t[1][0] * ud[1][0] + t[1][1] * ud[1][1]],
            ];
            if lambda != 0.0 {
                let tr = (o[0][0] + o[1][1]) * mix;
                for row in o.iter_mut() {
                    for v in row.iter_mut() {
                        *v *= keep;
                    }
                }
                o[0][0] += tr;
                o[1][1] += tr;
            }
            row0[c] = o[0][0];
            row0[c1] = o[0][1];
            row1[c] = o[1][0];
            row1[c1] = o[1][1];
        }
    }
}

/// `u` is the 4×4 local matrix with local bit 0 on wire `w0`.
fn step_two(e: &mut [C64], n: usize, w0: usize, w1: usize, u: &[C64; 16], lambda: f64) {
    let dim = 1usize << n;
    let (b0, b1) = (1usize << w0, 1usize << w1);
    let mask = b0 | b1;
    let off = [0, b0, b1, b0 | b1];
    // sort the four row offsets so the row views come out ascending
    let mut order = [0usize, 1, 2, 3];
    order.sort_by_key(|&i| off[i]);
    let keep = 1.0 - lambda;
    let mix = lambda / 4.0;
    let monomial: Option<[(usize, C64); 4]> = (0..4)
        .map(|i| {
            let nz: Vec<usize> = (0..4).filter(|&j| u[i * 4 + j].norm() > 1e-15).collect();
            (nz.len() == 1).then(|| (nz[0], u[i * 4 + nz[0]]))
        })
        .collect::<Option<Vec<_>>>()
        .map(|v| [v[0], v[1], v[2], v[3]]);
    for r in (0..dim).filter(|r| r & mask == 0) {
        let sorted = rows_mut(e, dim, order.map(|i| r | off[i]));
        let mut rows: [&mut [C64]; 4] = std::array::from_fn(|_| &mut [][..]);
        for (slot, row) in order.iter().zip(sorted) {
            rows[*slot] = row;
        }
        for c in (0..dim).filter(|c| c & mask == 0) {
            let mut m = [C64::new(0.0, 0.0); 16];
            for i in 0..4 {
                for j in 0..4 {
                    m[i * 4 + j] = rows[i][c | off[j]];
                }
            }
            let mut o = [C64::new(0.0, 0.0); 16];
            match &monomial {
                Some(p) => {
                    for i in 0..4 {
                        for j in 0..4 {
                            o[i * 4 + j] = p[i].1 * p[j].1.conj() * m[p[i].0 * 4 + p[j].0];
                        }
                    }
                }
                None => {
                    let mut t = [C64::new(0.0, 0.0); 16];
                    for i in 0..4 {
                        for l in 0..4 {
                            for j in 0..4 {
                                t[i * 4 + j] += u[i * 4 + l] * m[l * 4 + j];
                            }
                        }
                    }
                    for i in 0..4 {
                        for j in 0..4 {
                            for l in 0..4 {
                                o[i * 4 + j] += t[i * 4 + l] * u[j * 4 + l].conj();
                            }
                        }
                    }
                }
            }
            if lambda != 0.0 {
                let tr = (o[0] + o[5] + o[10] + o[15]) * mix;
                for v in o.iter_mut() {
                    *v *= keep;
                }
                for i in 0..4 {
                    o[i * 5] += tr;
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    rows[i][c | off[j]] = o[i * 4 + j];
                }
            }
        }
    }
}

fn check_runnable(circuit: &Circuit) -> Result<()> {
    let n = circuit.n_qubits();
    if n > DENSITY_MATRIX_LIMIT {
        return Err(Error::Resource(format!(
            "{n}-wire density matrix exceeds the {DENSITY_MATRIX_LIMIT}-wire limit; cut the circuit or shrink the window"
        )));
    }
    if let Some(g) = circuit.gates().iter().find(|g| g.width() > 2 || (g.width() == 2 && g.kind() != GateKind::CX)) {
        return Err(Error::Precondition(format!("noisy runs need a lowered circuit, found {g}")));
    }
    Ok(())
}

fn evolve(circuit: &Circuit, noise: &NoiseModel, input: &Statevector) -> Result<DensityMatrix> {
    noise.validate()?;
    check_runnable(circuit)?;
    let psi = input.extended(circuit.n_qubits().max(input.n_qubits()))?;
    let mut rho = DensityMatrix::from_pure(&psi);
    for g in circuit.gates() {
        let p = if g.width() == 1 { noise.p1 } else { noise.p2 };
        noisy_gate_in_place(&mut rho, g, p);
    }
    Ok(rho)
}

/// Runs a lowered circuit on `input` (zero-extended to the circuit width)
/// with depolarizing noise after every gate and readout flips on every
/// wire at the end.
pub fn run_noisy(circuit: &Circuit, noise: &NoiseModel, input: &Statevector) -> Result<DensityMatrix> {
    let mut rho = evolve(circuit, noise, input)?;
    for w in 0..rho.n_qubits() {
        bit_flip_in_place(&mut rho, w, noise.p_readout);
    }
    Ok(rho)
}

/// [`run_noisy`] followed by a partial trace onto `keep`, computed on a
/// register that only holds the wires currently in play.
///
/// Wires above the input start in |0⟩ and stay exactly |0⟩⟨0| until a gate
/// first touches them, so they join the register then. A wire outside
/// `keep` is traced out right after its last gate; nothing later acts on
/// it, and its readout flip drops out of the trace.
pub fn run_noisy_reduced(
    circuit: &Circuit,
    noise: &NoiseModel,
    input: &Statevector,
    keep: &[usize],
) -> Result<DensityMatrix> {
    noise.validate()?;
    check_runnable(circuit)?;
    let width = circuit.n_qubits().max(input.n_qubits());
    if let Some(&w) = keep.iter().find(|&&w| w >= width) {
        return Err(Error::Shape(format!("kept wire {w} outside a {width}-wire run")));
    }
    let mut last_use = vec![None; width];
    for (i, g) in circuit.gates().iter().enumerate() {
        for w in g.wires() {
            last_use[w] = Some(i);
        }
    }
    // active[j] = original wire at register position j
    let mut active: Vec<usize> = (0..input.n_qubits()).collect();
    let mut rho = DensityMatrix::from_pure(input);
    let drop_finished =
        |rho: &mut DensityMatrix, active: &mut Vec<usize>, done: &dyn Fn(usize) -> bool| -> Result<()> {
            if active.iter().any(|&w| done(w) && !keep.contains(&w)) {
                let stay: Vec<usize> =
                    (0..active.len()).filter(|&j| !done(active[j]) || keep.contains(&active[j])).collect();
                *rho = rho.partial_trace(&stay)?;
                *active = stay.iter().map(|&j| active[j]).collect();
            }
            Ok(())
        };
    drop_finished(&mut rho, &mut active, &|w| last_use[w].is_none())?;
    for (i, g) in circuit.gates().iter().enumerate() {
        for w in g.wires() {
            if !active.contains(&w) {
                rho = rho.with_zero_wire();
                active.push(w);
            }
        }
        let local = g.remap(|w| active.iter().position(|&a| a == w).expect("active wire"));
        let p = if g.width() == 1 { noise.p1 } else { noise.p2 };
        noisy_gate_in_place(&mut rho, &local, p);
        drop_finished(&mut rho, &mut active, &|w| last_use[w] == Some(i))?;
    }
    for &w in keep {
        if !active.contains(&w) {
            rho = rho.with_zero_wire();
            active.push(w);
        }
    }
    let positions: Vec<usize> = keep.iter().map(|w| active.iter().position(|a| a == w).expect("kept wire")).collect();
    let mut rho = rho.partial_trace(&positions)?;
    for w in 0..rho.n_qubits() {
        bit_flip_in_place(&mut rho, w, noise.p_readout);
    }
    Ok(rho)
}

/// A classical mixture of pure states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub entries: Vec<(f64, Statevector)>,
}

pub fn ensemble_to_density(e: &Ensemble) -> Result<DensityMatrix> {
    let first = e.entries.first().ok_or_else(|| Error::Domain("empty ensemble".into()))?;
    let n = first.1.n_qubits();
    if e.entries.iter().any(|(p, _)| *p < 0.0 || !p.is_finite()) {
        return Err(Error::Domain("negative ensemble weight".into()));
    }
    let total: f64 = e.entries.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("ensemble weights sum to {total}")));
    }
    let dim = 1usize << n;
    let mut acc = vec![C64::new(0.0, 0.0); dim * dim];
    for (p, psi) in &e.entries {
        if psi.n_qubits() != n {
            return Err(Error::Shape("ensemble states differ in width".into()));
        }
        for (a, b) in acc.iter_mut().zip(DensityMatrix::from_pure(psi).entries()) {
            *a += *p * b;
        }
    }
    DensityMatrix::from_entries(n, acc)
}
