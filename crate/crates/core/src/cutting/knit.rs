use std::collections::BTreeMap;

use super::{CutPlan, CutTerm, Fragment};
use crate::error::{Error, Result};

/// Per-wire diagonal factors of a product observable: wire `w` contributes
/// `factors[w][bit]`. Wires past the end contribute 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductObservable {
    pub factors: Vec<[f64; 2]>,
}

impl ProductObservable {
    pub fn z_on(n: usize, wires: &[usize]) -> Self {
        let factors = (0..n).map(|w| if wires.contains(&w) { [1.0, -1.0] } else { [1.0, 1.0] }).collect();
        ProductObservable { factors }
    }

    /// Projector onto basis states with wire 0 set (the odd indices).
    pub fn odd_projector(n: usize) -> Self {
        let factors = (0..n).map(|w| if w == 0 { [0.0, 1.0] } else { [1.0, 1.0] }).collect();
        ProductObservable { factors }
    }

    fn factor(&self, wire: usize, bit: usize) -> f64 {
        self.factors.get(wire).map_or(1.0, |f| f[bit])
    }

    /// Value on every basis state of an `n`-wire register.
    pub fn diagonal(&self, n: usize) -> Vec<f64> {
        (0..1usize << n).map(|x| (0..n).map(|w| self.factor(w, (x >> w) & 1)).product()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnitResult {
    pub value: Option<f64>,
    /// Quasiprobabilities over the original register; entries may dip
    /// below zero when fragments are sampled.
    pub distribution: Option<Vec<f64>>,
    /// `distribution` with negatives clamped to 0 and renormalized.
    pub clamped: Option<Vec<f64>>,
    pub term_count: usize,
    pub one_norm: f64,
}

fn stub_weight(fragment: &Fragment, term: &CutTerm, z: usize) -> f64 {
    fragment
        .measured
        .iter()
        .map(|&(local, cut)| if term.choices[cut].signed && (z >> local) & 1 == 1 { -1.0 } else { 1.0 })
        .product()
}

/// Expectation of the fragment's share of `observable` given its Z-basis
/// outcome distribution, with cut stubs weighted by the term's eigenvalues.
pub fn fragment_expectation(
    plan: &CutPlan,
    term: &CutTerm,
    fragment_id: usize,
    probabilities: &[f64],
    observable: &ProductObservable,
) -> Result<f64> {
    let f = plan.fragments.get(fragment_id).ok_or_else(|| Error::Aggregation(format!("no fragment {fragment_id}")))?;
    check_len(f, probabilities)?;
    Ok(probabilities
        .iter()
        .enumerate()
        .map(|(z, p)| {
            let obs: f64 = f.outputs.iter().map(|&(local, w)| observable.factor(w, (z >> local) & 1)).product();
            p * obs * stub_weight(f, term, z)
        })
        .sum())
}

fn check_len(f: &Fragment, probabilities: &[f64]) -> Result<()> {
    if probabilities.len() != 1 << f.width() {
        return Err(Error::Aggregation(format!(
            "{} probabilities for a {}-wire fragment",
            probabilities.len(),
            f.width()
        )));
    }
    Ok(())
}

fn lookup<T>(data: &BTreeMap<(usize, usize), T>, t: usize, f: usize) -> Result<&T> {
    data.get(&(t, f)).ok_or_else(|| Error::Aggregation(format!("missing result for term {t}, fragment {f}")))
}

/// Σ_t c_t Π_F e_{t,F}, folded in ascending term order.
pub fn knit_expectation(
    plan: &CutPlan,
    terms: &[CutTerm],
    expectations: &BTreeMap<(usize, usize), f64>,
) -> Result<KnitResult> {
    let mut value = 0.0;
    for (t, term) in terms.iter().enumerate() {
        let mut prod = term.coefficient;
        for f in 0..plan.fragments.len() {
            prod *= lookup(expectations, t, f)?;
        }
        value += prod;
    }
    Ok(KnitResult {
        value: Some(value),
        distribution: None,
        clamped: None,
        term_count: terms.len(),
        one_norm: super::one_norm(terms),
    })
}

/// Reconstructs the original register's Z-basis distribution from each
/// (term, fragment) outcome distribution.
pub fn knit_z_distribution(
    plan: &CutPlan,
    terms: &[CutTerm],
    distributions: &BTreeMap<(usize, usize), Vec<f64>>,
) -> Result<KnitResult> {
    let n = plan.circuit.n_qubits();
    let dim = 1usize << n;
    // per fragment: position of each original output wire's bit
    let out_index: Vec<Vec<usize>> =
        plan.fragments.iter().map(|f| f.outputs.iter().map(|&(_, w)| w).collect()).collect();
    let mut dist = vec![0.0; dim];
    let mut marginals: Vec<Vec<f64>> = Vec::with_capacity(plan.fragments.len());
    for (t, term) in terms.iter().enumerate() {
        marginals.clear();
        for (fi, f) in plan.fragments.iter().enumerate() {
            let probs = lookup(distributions, t, fi)?;
            check_len(f, probs)?;
            let mut m = vec![0.0; 1 << f.outputs.len()];
            for (z, p) in probs.iter().enumerate() {
                if *p == 0.0 {
                    continue;
                }
                let y = f.outputs.iter().enumerate().fold(0, |acc, (i, &(local, _))| acc | (((z >> local) & 1) << i));
                m[y] += p * stub_weight(f, term, z);
            }
            marginals.push(m);
        }
        for (x, d) in dist.iter_mut().enumerate() {
            let mut prod = term.coefficient;
            for (m, wires) in marginals.iter().zip(&out_index) {
                let y = wires.iter().enumerate().fold(0, |acc, (i, &w)| acc | (((x >> w) & 1) << i));
                prod *= m[y];
                if prod == 0.0 {
                    break;
                }
            }
            *d += prod;
        }
    }
    let clamped = clamp_renormalize(&dist);
    Ok(KnitResult {
        value: None,
        distribution: Some(dist),
        clamped: Some(clamped),
        term_count: terms.len(),
        one_norm: super::one_norm(terms),
    })
}

fn clamp_renormalize(dist: &[f64]) -> Vec<f64> {
    let c: Vec<f64> = dist.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = c.iter().sum();
    if total > 0.0 {
        c.iter().map(|p| p / total).collect()
    } else {
        vec![1.0 / dist.len() as f64; dist.len()]
    }
}
