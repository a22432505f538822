use std::f64::consts::FRAC_PI_2;

use super::CutPlan;
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Term enumeration refuses plans with more cuts than this (8^6 terms).
pub const MAX_CUTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrepState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

/// One measure-and-prepare pair standing in for the identity channel on a
/// cut wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutChoice {
    pub basis: Basis,
    /// Weight outcomes by their eigenvalue (−1)^bit; unsigned choices
    /// measure the trace (weight 1 for both outcomes).
    pub signed: bool,
    pub prep: PrepState,
    /// +1 or −1; the term coefficient is the product of ±½ over cuts.
    pub sign: f64,
}

/// ρ = ½ Σ_{O∈{I,X,Y,Z}} tr(Oρ)·O with each O split into its two
/// eigenprojectors.
pub const CUT_CHOICES: [CutChoice; 8] = [
    CutChoice { basis: Basis::Z, signed: false, prep: PrepState::Zero, sign: 1.0 },
    CutChoice { basis: Basis::Z, signed: false, prep: PrepState::One, sign: 1.0 },
    CutChoice { basis: Basis::X, signed: true, prep: PrepState::Plus, sign: 1.0 },
    CutChoice { basis: Basis::X, signed: true, prep: PrepState::Minus, sign: -1.0 },
    CutChoice { basis: Basis::Y, signed: true, prep: PrepState::PlusI, sign: 1.0 },
    CutChoice { basis: Basis::Y, signed: true, prep: PrepState::MinusI, sign: -1.0 },
    CutChoice { basis: Basis::Z, signed: true, prep: PrepState::Zero, sign: 1.0 },
    CutChoice { basis: Basis::Z, signed: true, prep: PrepState::One, sign: -1.0 },
];

#[derive(Debug, Clone, PartialEq)]
pub struct CutTerm {
    pub coefficient: f64,
    /// One choice per cut, in plan order.
    pub choices: Vec<CutChoice>,
}

/// All 8^cuts terms. Term `t` picks choice `(t >> 3j) & 7` for cut `j`.
pub fn enumerate_terms(plan: &CutPlan) -> Result<Vec<CutTerm>> {
    let k = plan.cuts.len();
    if k > MAX_CUTS {
        return Err(Error::Resource(format!("{k} cuts give 8^{k} terms (limit {MAX_CUTS} cuts)")));
    }
    Ok((0..1usize << (3 * k))
        .map(|t| {
            let choices: Vec<CutChoice> = (0..k).map(|j| CUT_CHOICES[(t >> (3 * j)) & 7]).collect();
            let coefficient = choices.iter().map(|c| 0.5 * c.sign).product();
            CutTerm { coefficient, choices }
        })
        .collect())
}

pub fn one_norm(terms: &[CutTerm]) -> f64 {
    terms.iter().map(|t| t.coefficient.abs()).sum()
}

fn prepare(prep: PrepState, q: usize) -> Vec<Gate> {
    match prep {
        PrepState::Zero => vec![],
        PrepState::One => vec![Gate::x(q)],
        PrepState::Plus => vec![Gate::h(q)],
        PrepState::Minus => vec![Gate::x(q), Gate::h(q)],
        PrepState::PlusI => vec![Gate::h(q), Gate::phase(q, FRAC_PI_2)],
        PrepState::MinusI => vec![Gate::h(q), Gate::phase(q, -FRAC_PI_2)],
    }
}

/// Rotation taking the basis's +1 eigenstate to |0⟩.
fn rotate_to_z(basis: Basis, q: usize) -> Vec<Gate> {
    match basis {
        Basis::Z => vec![],
        Basis::X => vec![Gate::h(q)],
        Basis::Y => vec![Gate::phase(q, -FRAC_PI_2), Gate::h(q)],
    }
}

/// The fragment's gates on its local wires, with the term's state
/// preparations in front and basis rotations behind its cut stubs.
pub fn instantiate_fragment(plan: &CutPlan, term: &CutTerm, fragment_id: usize) -> Result<Circuit> {
    let f = plan
        .fragments
        .get(fragment_id)
        .ok_or_else(|| Error::Planning(format!("fragment {fragment_id} out of range ({})", plan.fragments.len())))?;
    if term.choices.len() != plan.cuts.len() {
        return Err(Error::Planning(format!("term has {} choices for {} cuts", term.choices.len(), plan.cuts.len())));
    }
    let gates = plan.circuit.gates();
    let cut_points = &plan.cuts;
    let mut c = Circuit::new(f.width());
    for &(local, cut) in &f.prepared {
        for g in prepare(term.choices[cut].prep, local) {
            c.try_push(g)?;
        }
    }
    for &gi in &f.gates {
        let g = &gates[gi];
        let mapped = g.remap(|w| {
            let k = cut_points.iter().filter(|p| p.wire == w && p.position <= gi).count();
            f.segments.iter().position(|&s| s == (w, k)).expect("gate wire in fragment")
        });
        c.try_push(mapped)?;
    }
    for &(local, cut) in &f.measured {
        for g in rotate_to_z(term.choices[cut].basis, local) {
            c.try_push(g)?;
        }
    }
    Ok(c.label("fragment", fragment_id))
}
