use std::collections::BTreeMap;

use super::{execute_jobs, Job, JobOutput, RunConfig, Shots};
use crate::circuit::{build_encoding_circuit, build_qhed, Circuit, RegisterLayout};
use crate::cutting::{enumerate_terms, instantiate_fragment, knit_z_distribution, plan_cuts, CutPlan, CutTerm};
use crate::error::{Error, JobId, Result};
use crate::imaging::{
    combine_axes, encode_window, plan_decomposition, reassemble, threshold, window_edges_from_amplitudes,
    window_edges_from_probabilities, Axis, EdgeMap, ImageVolume, SubdomainPlan,
};
use crate::rng::derive_seed;
use crate::sim::{marginal, Statevector};
use crate::transpile::{compute_metrics, transpile, CircuitMetrics, McxStrategy, MetricsRecord};

/// Edge magnitudes below this fraction of the window norm are rounding
/// residue and are set to 0.
const EDGE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PipelineReport {
    /// Per-axis magnitude maps, before normalization.
    pub axis_maps: Vec<(Axis, EdgeMap)>,
    /// Pointwise max of the axis maps, normalized to [0, 1].
    pub edges: EdgeMap,
    /// `edges` thresholded at the configured level.
    pub binary: EdgeMap,
    pub metrics: MetricsRecord,
    /// Windows summed over axes (P).
    pub windows: usize,
    pub terms: usize,
    pub fragments: usize,
    pub jobs: usize,
}

/// Wire-cut layout shared by every window: the cuts depend only on which
/// wires each gate touches, and that does not depend on the pixel values.
struct CutLayout {
    cuts: Vec<crate::cutting::CutPoint>,
    terms: Vec<CutTerm>,
    fragments: usize,
    metrics: CircuitMetrics,
}

/// Encoding of `amplitudes` on the data wires followed by the lowered QHED.
pub fn prepared_qhed(amplitudes: &[f64], qhed: &Circuit, layout: &RegisterLayout) -> Result<Circuit> {
    let mut c = Circuit::new(qhed.n_qubits());
    c.append_mapped(&build_encoding_circuit(amplitudes)?, &layout.data_wires)?;
    c.append(qhed)?;
    Ok(c)
}

/// Largest depth, CX count and gate count over the fragments, instantiated
/// with the first term.
pub(crate) fn fragment_metrics(plan: &CutPlan, term: &CutTerm) -> Result<CircuitMetrics> {
    let mut m = CircuitMetrics { depth: 0, cx_count: 0, gate_count: 0 };
    for f in 0..plan.fragments.len() {
        let fm = compute_metrics(&instantiate_fragment(plan, term, f)?)?;
        m.depth = m.depth.max(fm.depth);
        m.cx_count = m.cx_count.max(fm.cx_count);
        m.gate_count = m.gate_count.max(fm.gate_count);
    }
    Ok(m)
}

/// Decompose along each axis, evaluate every (window, term, fragment) job,
/// knit, reassemble, merge the axes and threshold.
pub fn run_qhed_pipeline(image: &ImageVolume, config: &RunConfig, axes: &[Axis]) -> Result<PipelineReport> {
    config.validate()?;
    if axes.is_empty() {
        return Err(Error::Config("no axes selected".into()));
    }
    let n = config.n_encode;
    let (qhed, layout) = build_qhed(n, config.variant.decrement())?;
    let lowered = transpile(&qhed, McxStrategy::GrayCode)?;
    let width = layout.width();
    let output = layout.output_wires();

    let cap = config.max_width.unwrap_or(width);
    let cut = if config.cuts.is_some() || width > cap {
        let template = prepared_qhed(&vec![1.0; 1 << n], &lowered, &layout)?;
        let plan = plan_cuts(&template, cap, config.cuts.as_deref())?;
        let terms = enumerate_terms(&plan)?;
        let metrics = fragment_metrics(&plan, &terms[0])?;
        Some(CutLayout { cuts: plan.cuts, terms, fragments: plan.fragments.len(), metrics })
    } else {
        None
    };

    let plans: Vec<SubdomainPlan> = axes.iter().map(|&a| plan_decomposition(image, a, n)).collect::<Result<_>>()?;
    let mut window_plans: Vec<Option<CutPlan>> = Vec::new();
    let mut jobs = Vec::new();
    let mut norms = Vec::new();
    for plan in &plans {
        for w in 0..plan.windows.len() {
            let sub = norms.len();
            let enc = encode_window(plan, w)?;
            norms.push(enc.norm);
            let job = |id: JobId, circuit: Circuit, input: Statevector, keep: Vec<usize>| Job {
                id,
                circuit,
                input,
                keep,
                shots: config.shots,
                seed: derive_seed(config.seed, &[id.subdomain as u64, id.term as u64, id.fragment as u64]),
            };
            match &cut {
                None => {
                    let input = Statevector::from_real(&enc.amplitudes)?.tensor(&Statevector::zero(1)?);
                    jobs.push(job(JobId::new(sub, 0, 0), lowered.clone(), input, output.clone()));
                    window_plans.push(None);
                }
                Some(layout_cut) => {
                    let circuit = prepared_qhed(&enc.amplitudes, &lowered, &layout)?;
                    let plan = plan_cuts(&circuit, cap, Some(&layout_cut.cuts))?;
                    for (t, term) in layout_cut.terms.iter().enumerate() {
                        for f in 0..plan.fragments.len() {
                            let frag = instantiate_fragment(&plan, term, f)?;
                            let keep = (0..frag.n_qubits()).collect();
                            let input = Statevector::zero(frag.n_qubits())?;
                            jobs.push(job(JobId::new(sub, t, f), frag, input, keep));
                        }
                    }
                    window_plans.push(Some(plan));
                }
            }
        }
    }

    let windows = norms.len();
    let (terms, fragments) = cut.as_ref().map_or((1, 1), |c| (c.terms.len(), c.fragments));
    if jobs.len() != windows * terms * fragments {
        return Err(Error::Aggregation(format!(
            "{} jobs for {windows} windows × {terms} terms × {fragments} fragments",
            jobs.len()
        )));
    }
    let results = execute_jobs(&jobs, config.workers, config.noise.as_ref())?;
    drop(jobs);

    let signed = config.noise.is_none() && config.shots == Shots::Exact && cut.is_none();
    let mut axis_maps = Vec::new();
    let mut sub = 0;
    for (plan, &axis) in plans.iter().zip(axes) {
        let mut edges = Vec::with_capacity(plan.windows.len());
        for _ in 0..plan.windows.len() {
            let raw = match (&cut, &window_plans[sub]) {
                (Some(c), Some(p)) => knitted_edges(p, &c.terms, &results, sub, &output, norms[sub])?,
                _ => {
                    let out = lookup(&results, JobId::new(sub, 0, 0))?;
                    match (&out.amplitudes, signed) {
                        (Some(a), true) => window_edges_from_amplitudes(&a[..2 << n], norms[sub]),
                        _ => window_edges_from_probabilities(&out.probabilities, norms[sub]),
                    }
                }
            };
            let floor = EDGE_FLOOR * norms[sub].max(1.0);
            edges.push(raw.into_iter().map(|e| if e.abs() < floor { 0.0 } else { e }).collect());
            sub += 1;
        }
        axis_maps.push((axis, reassemble(plan, &edges)?));
    }
    let maps: Vec<EdgeMap> = axis_maps.iter().map(|(_, m)| m.clone()).collect();
    let combined = combine_axes(&maps)?;
    let binary = threshold(&combined, config.threshold)?;

    let metrics = match &cut {
        Some(c) => c.metrics,
        None => compute_metrics(&lowered)?,
    };
    let record = MetricsRecord {
        variant: config.variant,
        n_encode: n,
        cut: cut.is_some(),
        seed: config.seed,
        depth: metrics.depth,
        cx_count: metrics.cx_count,
        gate_count: metrics.gate_count,
        fidelity: None,
        note: Some(format!("windows={windows} terms={terms} fragments={fragments} jobs={}", results.len())),
    };
    Ok(PipelineReport {
        axis_maps,
        edges: combined,
        binary,
        metrics: record,
        windows,
        terms,
        fragments,
        jobs: results.len(),
    })
}

fn lookup(results: &BTreeMap<JobId, JobOutput>, id: JobId) -> Result<&JobOutput> {
    results.get(&id).ok_or_else(|| Error::Aggregation(format!("missing result for {id}")))
}

fn knitted_edges(
    plan: &CutPlan,
    terms: &[CutTerm],
    results: &BTreeMap<JobId, JobOutput>,
    sub: usize,
    output: &[usize],
    norm: f64,
) -> Result<Vec<f64>> {
    let mut dists = BTreeMap::new();
    for t in 0..terms.len() {
        for f in 0..plan.fragments.len() {
            dists.insert((t, f), lookup(results, JobId::new(sub, t, f))?.probabilities.clone());
        }
    }
    let knit = knit_z_distribution(plan, terms, &dists)?;
    let probs = knit.clamped.ok_or_else(|| Error::Aggregation("knitting returned no distribution".into()))?;
    Ok(window_edges_from_probabilities(&marginal(&probs, output), norm))
}
