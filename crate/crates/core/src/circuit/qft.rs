use std::f64::consts::PI;

use super::{Circuit, Gate};
use crate::error::{Error, Result};

/// Quantum Fourier transform on `n` wires.
///
/// Forward: `|x⟩ → N^{-1/2} Σ_y e^{2πi·xy/N} |y⟩`. Built MSB first as a
/// Hadamard followed by controlled phases π/2^d from each lower wire at
/// distance d; the trailing SWAP network undoes the bit reversal of that
/// ladder. The inverse is the conjugate transpose gate by gate.
pub fn build_qft(n: usize, inverse: bool, with_swaps: bool) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::Domain("QFT needs at least one qubit".into()));
    }
    let mut c = Circuit::new(n);
    for j in (0..n).rev() {
        c.push(Gate::h(j));
        for k in (0..j).rev() {
            c.push(Gate::cphase(k, j, PI / (1u64 << (j - k)) as f64));
        }
    }
    if with_swaps {
        for i in 0..n / 2 {
            c.push(Gate::swap(i, n - 1 - i));
        }
    }
    let c = if inverse { c.inverse() } else { c };
    Ok(c.label("kind", if inverse { "iqft" } else { "qft" }))
}
