//! In-place amplitude kernels shared by the statevector and the vectorized
//! density matrix. Wires are bit positions of the flat index.

use num_complex::Complex64 as C64;

use crate::circuit::{Gate, GateKind, Mat2};

#[inline]
fn insert_zero_bit(i: usize, bit: usize) -> usize {
    let low = i & ((1usize << bit) - 1);
    ((i >> bit) << (bit + 1)) | low
}

/// Applies `m` to bit `target` of every index whose `control_mask` bits
/// are all set.
pub(crate) fn apply_controlled(v: &mut [C64], control_mask: usize, target: usize, m: &Mat2) {
    let half = v.len() / 2;
    let tbit = 1usize << target;
    let zero = C64::new(0.0, 0.0);
    let is_x = m[0][0] == zero && m[1][1] == zero && m[0][1] == C64::new(1.0, 0.0) && m[1][0] == C64::new(1.0, 0.0);
    let is_diag = m[0][1] == zero && m[1][0] == zero;
    for i in 0..half {
        let i0 = insert_zero_bit(i, target);
        if i0 & control_mask != control_mask {
            continue;
        }
        let i1 = i0 | tbit;
        if is_x {
            v.swap(i0, i1);
        } else if is_diag {
            v[i0] *= m[0][0];
            v[i1] *= m[1][1];
        } else {
            let a = v[i0];
            let b = v[i1];
            v[i0] = m[0][0] * a + m[0][1] * b;
            v[i1] = m[1][0] * a + m[1][1] * b;
        }
    }
}

pub(crate) fn apply_swap(v: &mut [C64], a: usize, b: usize) {
    let (abit, bbit) = (1usize << a, 1usize << b);
    for i in 0..v.len() {
        if i & abit != 0 && i & bbit == 0 {
            v.swap(i, i ^ abit ^ bbit);
        }
    }
}

/// Applies `gate` with every wire shifted by `offset`; `conjugate` applies
/// the elementwise complex conjugate of the gate's matrix instead.
pub(crate) fn apply_gate_shifted(v: &mut [C64], gate: &Gate, offset: usize, conjugate: bool) {
    if gate.kind() == GateKind::SWAP {
        let t = gate.targets();
        apply_swap(v, t[0] + offset, t[1] + offset);
        return;
    }
    let mut m = gate.target_matrix().expect("single-target gate");
    if conjugate {
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e = e.conj();
            }
        }
    }
    let mask = gate.controls().iter().fold(0usize, |acc, &c| acc | (1 << (c + offset)));
    apply_controlled(v, mask, gate.targets()[0] + offset, &m);
}
