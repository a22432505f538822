use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};
use crate::error::{Error, Result};

/// Wire roles of a QHED register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    /// q1..qn, holding the encoded data |f⟩.
    pub data_wires: Vec<usize>,
    /// q0, the redundant least significant qubit.
    pub lsb_wire: usize,
    /// |0…0⟩ workspace of the ancilla decrement.
    pub ancilla_wires: Vec<usize>,
}

impl RegisterLayout {
    /// q0 followed by the data wires: the register whose odd basis states
    /// carry the differences.
    pub fn output_wires(&self) -> Vec<usize> {
        std::iter::once(self.lsb_wire).chain(self.data_wires.iter().copied()).collect()
    }

    pub fn width(&self) -> usize {
        1 + self.data_wires.len() + self.ancilla_wires.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecrementVariant {
    /// Ascending chain of multi-controlled X gates (original QHED).
    Mcx,
    /// Toffoli borrow ladder over n − 2 ancillae (QHED^M).
    Ancilla,
}

/// Binary-tree state preparation with uniformly controlled RY rotations.
///
/// Level `k` rotates wire `m-1-k` conditioned on the `k` wires above it,
/// splitting the probability mass of each block between its lower and
/// upper halves. Each uniformly controlled rotation is synthesized as an
/// alternating RY / CX sequence walking the Gray code of the controls, so
/// the circuit uses only RY and CX and has `2^(m+1) - 3` gates.
pub fn build_encoding_circuit(amplitudes: &[f64]) -> Result<Circuit> {
    let m = crate::sim::power_of_two_exponent(amplitudes.len())?;
    if let Some(v) = amplitudes.iter().find(|v| **v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain(format!("encoding needs finite nonnegative values, got {v}")));
    }
    if amplitudes.iter().all(|&v| v == 0.0) {
        return Err(Error::Normalization);
    }
    let weights: Vec<f64> = amplitudes.iter().map(|v| v * v).collect();
    let mut circuit = Circuit::new(m);
    for level in 0..m {
        let target = m - 1 - level;
        let block = 1usize << (target + 1);
        let half = block / 2;
        // control value x = index >> (target + 1), control j = wire target+1+j
        let angles: Vec<f64> = (0..1usize << level)
            .map(|x| {
                let base = x * block;
                let lo: f64 = weights[base..base + half].iter().sum();
                let hi: f64 = weights[base + half..base + block].iter().sum();
                2.0 * hi.sqrt().atan2(lo.sqrt())
            })
            .collect();
        let controls: Vec<usize> = (target + 1..m).collect();
        uniformly_controlled_ry(&mut circuit, &controls, target, &angles);
    }
    Ok(circuit.label("kind", "encoding"))
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Appends RY(angles[x]) on `target` conditioned on the controls reading
/// `x` (bit j of x is `controls[j]`).
fn uniformly_controlled_ry(circuit: &mut Circuit, controls: &[usize], target: usize, angles: &[f64]) {
    let k = controls.len();
    if k == 0 {
        circuit.push(Gate::ry(target, angles[0]));
        return;
    }
    let n = 1usize << k;
    // angles = M θ with M[x][i] = (-1)^{popcount(x & gray(i))}; M^T M = n I.
    let thetas: Vec<f64> = (0..n)
        .map(|i| {
            let g = gray(i);
            (0..n).map(|x| if (x & g).count_ones().is_multiple_of(2) { angles[x] } else { -angles[x] }).sum::<f64>()
                / n as f64
        })
        .collect();
    for (i, &theta) in thetas.iter().enumerate() {
        circuit.push(Gate::ry(target, theta));
        let flip = gray(i) ^ gray((i + 1) % n);
        circuit.push(Gate::cx(controls[flip.trailing_zeros() as usize], target));
    }
}

/// Decrement |i⟩ → |i−1 mod 2^n⟩ on wires 0..n as an ascending chain:
/// X(q0), CX(q0→q1), CCX(q0,q1→q2), …, MCX(q0..q_{n−2} → q_{n−1}).
///
/// Bit j flips exactly when all lower bits were 0 before the step; after
/// the lower bits have been flipped that condition reads "all lower bits
/// are 1", which is what each positively controlled gate tests.
pub fn build_decrement_mcx(n_data: usize) -> Result<Circuit> {
    if n_data == 0 {
        return Err(Error::Domain("decrement needs at least one wire".into()));
    }
    let mut c = Circuit::new(n_data);
    for j in 0..n_data {
        let controls: Vec<usize> = (0..j).collect();
        c.push(Gate::mcx(&controls, j));
    }
    Ok(c.label("kind", "decrement-mcx"))
}

/// Decrement on data wires 0..n using n−2 ancillae (wires n..2n−2), with
/// only X, CX and Toffoli gates. Ancillae must start in |0⟩ and are
/// returned to |0⟩.
///
/// The low n−1 data bits are complemented so that "all lower bits zero"
/// becomes an AND. A Toffoli ladder accumulates a_k = AND(c_0..c_{k+1});
/// the top bit flips under the last ladder rung, then the ladder is
/// unwound rung by rung, flipping each data bit from the rung below it
/// once its own rung has been uncomputed. Finally the complement is undone
/// (bit 0's complement, flip and restore collapse into one X).
pub fn build_decrement_ancilla(n_data: usize) -> Result<Circuit> {
    if n_data < 3 {
        let mut c = build_decrement_mcx(n_data)?;
        c.metadata.insert("kind".into(), "decrement-ancilla".into());
        return Ok(c);
    }
    let n = n_data;
    let anc = |k: usize| n + k;
    let mut c = Circuit::new(2 * n - 2);
    c.set_ancillas((n..2 * n - 2).collect())?;
    for q in 0..n - 1 {
        c.push(Gate::x(q));
    }
    c.push(Gate::toffoli(0, 1, anc(0)));
    for k in 1..n - 2 {
        c.push(Gate::toffoli(anc(k - 1), k + 1, anc(k)));
    }
    c.push(Gate::cx(anc(n - 3), n - 1));
    for k in (1..n - 2).rev() {
        c.push(Gate::toffoli(anc(k - 1), k + 1, anc(k)));
        c.push(Gate::cx(anc(k - 1), k + 1));
    }
    c.push(Gate::toffoli(0, 1, anc(0)));
    c.push(Gate::cx(0, 1));
    for q in 1..n - 1 {
        c.push(Gate::x(q));
    }
    Ok(c.label("kind", "decrement-ancilla"))
}

/// H(q0) · Decrement(q0..qn) · H(q0) on |f⟩ ⊗ |0⟩, with |f⟩ on wires 1..=n.
pub fn build_qhed(n_data: usize, variant: DecrementVariant) -> Result<(Circuit, RegisterLayout)> {
    if n_data == 0 {
        return Err(Error::Domain("QHED needs at least one data qubit".into()));
    }
    let width = n_data + 1;
    let decrement = match variant {
        DecrementVariant::Mcx => build_decrement_mcx(width)?,
        DecrementVariant::Ancilla => build_decrement_ancilla(width)?,
    };
    let mut c = Circuit::new(decrement.n_qubits());
    c.push(Gate::h(0));
    c.append(&decrement)?;
    c.push(Gate::h(0));
    let layout = RegisterLayout {
        data_wires: (1..=n_data).collect(),
        lsb_wire: 0,
        ancilla_wires: (width..decrement.n_qubits()).collect(),
    };
    c.set_ancillas(layout.ancilla_wires.clone())?;
    let name = match variant {
        DecrementVariant::Mcx => "qhed",
        DecrementVariant::Ancilla => "qhed-m",
    };
    Ok((c.label("kind", name).label("n_data", n_data), layout))
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64 as C64;

    use super::*;
    use crate::circuit::{circuit_unitary, GateKind};
    use crate::sim::{run_circuit, QuantumState, Statevector};

    fn assert_close(a: &[C64], b: &[C64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).norm() < tol, "index {i}: {x} vs {y}");
        }
    }

    #[test]
    fn encoding_uniform_one_qubit() {
        let c = build_encoding_circuit(&[1.0, 1.0]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.gates()[0].kind(), GateKind::RY);
        assert!((c.gates()[0].angle().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn encoding_basis_vector_is_identity_on_zero() {
        let c = build_encoding_circuit(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = run_circuit(&Statevector::zero(2).unwrap(), &c).unwrap();
        assert_close(out.amplitudes(), Statevector::zero(2).unwrap().amplitudes(), 1e-12);
    }

    #[test]
    fn encoding_matches_direct_preparation() {
        let mut rng = crate::rng::SampleRng::new(5);
        for m in 1..=6 {
            let v: Vec<f64> = (0..1 << m).map(|_| rng.uniform()).collect();
            let c = build_encoding_circuit(&v).unwrap();
            assert!(c.len() <= 1 << (m + 1));
            let out = run_circuit(&Statevector::zero(m).unwrap(), &c).unwrap();
            assert_close(out.amplitudes(), Statevector::from_real(&v).unwrap().amplitudes(), 1e-10);
        }
        // sparse vectors exercise the atan2(0, 0) branches
        let v = [0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 4.0];
        let out = run_circuit(&Statevector::zero(3).unwrap(), &build_encoding_circuit(&v).unwrap()).unwrap();
        assert_close(out.amplitudes(), Statevector::from_real(&v).unwrap().amplitudes(), 1e-12);
    }

    #[test]
    fn encoding_rejects_bad_input() {
        assert!(matches!(build_encoding_circuit(&[1.0, -1.0]), Err(Error::Domain(_))));
        assert!(matches!(build_encoding_circuit(&[0.0, 0.0]), Err(Error::Normalization)));
        assert!(matches!(build_encoding_circuit(&[1.0, 1.0, 1.0]), Err(Error::Shape(_))));
    }

    fn decrement_oracle(n: usize) -> Vec<Vec<C64>> {
        // D[r][c] = 1 iff r = c − 1 mod 2^n, the matrix with ones above the
        // diagonal and a one in the bottom-left corner.
        let dim = 1 << n;
        let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        for col in 0..dim {
            m[(col + dim - 1) % dim][col] = C64::new(1.0, 0.0);
        }
        m
    }

    #[test]
    fn mcx_decrement_is_cyclic_permutation() {
        let c1 = build_decrement_mcx(1).unwrap();
        assert_eq!(c1.len(), 1);
        assert_eq!(c1.gates()[0].kind(), GateKind::X);
        for n in 1..=5 {
            let u = circuit_unitary(&build_decrement_mcx(n).unwrap()).unwrap();
            let d = decrement_oracle(n);
            for r in 0..1 << n {
                assert_close(u.row(r), &d[r], 1e-12);
            }
        }
        // n = 2: |0⟩ → |3⟩
        let out = run_circuit(&Statevector::zero(2).unwrap(), &build_decrement_mcx(2).unwrap()).unwrap();
        assert!((out.amplitudes()[3].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mcx_decrement_rotates_amplitudes() {
        let f: Vec<f64> = (1..=8).map(|v| v as f64).collect();
        let psi = Statevector::from_real(&f).unwrap();
        let out = run_circuit(&psi, &build_decrement_mcx(3).unwrap()).unwrap();
        let c = psi.amplitudes();
        let expected: Vec<C64> = (0..8).map(|i| c[(i + 1) % 8]).collect();
        assert_close(out.amplitudes(), &expected, 1e-12);
    }

    #[test]
    fn ancilla_decrement_uses_only_x_cx_toffoli() {
        for n in 3..=8 {
            let c = build_decrement_ancilla(n).unwrap();
            assert_eq!(c.n_qubits(), 2 * n - 2);
            assert!(c.gates().iter().all(|g| matches!(g.kind(), GateKind::X | GateKind::CX | GateKind::Toffoli)));
        }
    }

    #[test]
    fn ancilla_decrement_exhaustive_basis_sweep() {
        for n in 3..=6 {
            let c = build_decrement_ancilla(n).unwrap();
            let width = c.n_qubits();
            for i in 0..1usize << n {
                let out = run_circuit(&Statevector::basis(width, i).unwrap(), &c).unwrap();
                let want = (i + (1 << n) - 1) % (1 << n);
                assert!((out.amplitudes()[want].re - 1.0).abs() < 1e-12, "n={n} i={i}");
            }
        }
        // n = 3: |0⟩|00⟩ → |7⟩|00⟩
        let out = run_circuit(&Statevector::zero(4).unwrap(), &build_decrement_ancilla(3).unwrap()).unwrap();
        assert!((out.amplitudes()[7].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ancillas_return_to_zero_with_unit_purity() {
        let c = build_decrement_ancilla(4).unwrap();
        let psi = Statevector::from_real(&(0..16).map(|v| (v as f64).sin().abs() + 0.1).collect::<Vec<_>>())
            .unwrap()
            .extended(c.n_qubits())
            .unwrap();
        let out = run_circuit(&crate::sim::DensityMatrix::from_pure(&psi), &c).unwrap();
        let anc = out.partial_trace(&[4, 5]).unwrap();
        assert!((anc.purity() - 1.0).abs() < 1e-10);
        assert!((anc.entry(0, 0).re - 1.0).abs() < 1e-10);
        let _ = out.n_qubits();
    }

    #[test]
    fn small_ancilla_requests_fall_back() {
        assert_eq!(build_decrement_ancilla(2).unwrap().n_qubits(), 2);
        assert_eq!(build_decrement_ancilla(1).unwrap().len(), 1);
    }

    fn qhed_oracle(c: &[f64]) -> Vec<f64> {
        let n = c.len();
        let mut out = vec![0.0; 2 * n];
        for k in 0..n {
            out[2 * k] = (c[k] + c[(k + 1) % n]) / 2.0;
            out[2 * k + 1] = (c[k] - c[(k + 1) % n]) / 2.0;
        }
        out
    }

    #[test]
    fn qhed_final_state() {
        let mut rng = crate::rng::SampleRng::new(9);
        for variant in [DecrementVariant::Mcx, DecrementVariant::Ancilla] {
            for n in 1..=5 {
                let f: Vec<f64> = (0..1 << n).map(|_| rng.uniform()).collect();
                let psi = Statevector::from_real(&f).unwrap();
                let (circ, layout) = build_qhed(n, variant).unwrap();
                let input = psi.tensor(&Statevector::zero(1).unwrap()).extended(circ.n_qubits()).unwrap();
                let out = run_circuit(&input, &circ).unwrap();
                let c: Vec<f64> = psi.amplitudes().iter().map(|a| a.re).collect();
                let want = qhed_oracle(&c);
                for (k, w) in want.iter().enumerate() {
                    assert!((out.amplitudes()[k].re - w).abs() < 1e-12, "{variant:?} n={n} k={k}");
                }
                assert_eq!(layout.output_wires(), (0..=n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn qhed_constant_and_impulse() {
        let (circ, _) = build_qhed(2, DecrementVariant::Mcx).unwrap();
        let input = Statevector::from_real(&[1.0; 4]).unwrap().tensor(&Statevector::zero(1).unwrap());
        let out = run_circuit(&input, &circ).unwrap();
        for k in 0..4 {
            assert!(out.amplitudes()[2 * k + 1].norm() < 1e-12);
        }
        let input = Statevector::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap().tensor(&Statevector::zero(1).unwrap());
        let out = run_circuit(&input, &circ).unwrap();
        let odd: Vec<f64> = (0..4).map(|k| out.amplitudes()[2 * k + 1].re).collect();
        let want = [0.5, 0.0, 0.0, -0.5];
        for (a, b) in odd.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn qhed_m_layout() {
        let (c, layout) = build_qhed(5, DecrementVariant::Ancilla).unwrap();
        assert_eq!(c.n_qubits(), 10);
        assert_eq!(layout.ancilla_wires, vec![6, 7, 8, 9]);
        assert_eq!(c.ancillas(), &[6, 7, 8, 9]);
        let (c, layout) = build_qhed(5, DecrementVariant::Mcx).unwrap();
        assert_eq!(c.n_qubits(), 6);
        assert!(layout.ancilla_wires.is_empty());
    }
}
