//! Wire cutting: split a circuit into fragments no wider than a cap, run
//! every (term, fragment) pair independently and knit the results back
//! into expectations or full Z-basis distributions.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::sim::{counts_to_probabilities, run_circuit, sample_distribution, QuantumState, Statevector};

mod knit;
mod plan;
mod terms;

pub use knit::{fragment_expectation, knit_expectation, knit_z_distribution, KnitResult, ProductObservable};
pub use plan::{parse_cut_manifest, plan_cuts, write_cut_manifest, CutPlan, CutPoint, Fragment};
pub use terms::{
    enumerate_terms, instantiate_fragment, one_norm, Basis, CutChoice, CutTerm, PrepState, CUT_CHOICES, MAX_CUTS,
};

/// Z-basis distribution of a fragment run from |0…0⟩, exactly or from
/// `shots` samples.
pub fn fragment_distribution(
    plan: &CutPlan,
    term: &CutTerm,
    fragment_id: usize,
    shots: Option<u64>,
    seed: u64,
) -> Result<Vec<f64>> {
    let c = instantiate_fragment(plan, term, fragment_id)?;
    let psi = run_circuit(&Statevector::zero(c.n_qubits().max(1))?, &c)?;
    let probs = psi.z_probabilities();
    match shots {
        None => Ok(probs),
        Some(s) => Ok(counts_to_probabilities(&sample_distribution(&probs, s, seed)?, probs.len())),
    }
}

/// Every (term, fragment) distribution, evaluated serially and exactly.
pub fn exact_fragment_distributions(plan: &CutPlan, terms: &[CutTerm]) -> Result<BTreeMap<(usize, usize), Vec<f64>>> {
    let mut out = BTreeMap::new();
    for (t, term) in terms.iter().enumerate() {
        for f in 0..plan.fragments.len() {
            out.insert((t, f), fragment_distribution(plan, term, f, None, 0)?);
        }
    }
    Ok(out)
}
