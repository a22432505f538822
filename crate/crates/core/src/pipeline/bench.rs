use std::collections::BTreeMap;

use super::edges::{fragment_metrics, prepared_qhed};
use super::execute_parallel;
use crate::circuit::{build_qhed, Circuit, RegisterLayout};
use crate::cutting::{enumerate_terms, instantiate_fragment, knit_z_distribution, plan_cuts, CutPlan};
use crate::error::{Error, JobId, Result};
use crate::noise::{classical_fidelity, fidelity, run_noisy_reduced, NoiseModel, DENSITY_MATRIX_LIMIT};
use crate::rng::{derive_seed, SampleRng};
use crate::sim::{marginal, run_circuit, DensityMatrix, QuantumState, Statevector};
use crate::transpile::{compute_metrics, transpile, CircuitMetrics, McxStrategy, MetricsRecord, Variant};

/// Cut rows get a fidelity only up to this many cuts (8^4 noisy fragment
/// runs per row); above it the column is left blank.
pub const CUT_FIDELITY_BUDGET: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSweep {
    pub n_min: usize,
    pub n_max: usize,
    pub seeds: u64,
    pub variants: Vec<Variant>,
    /// Also emit one cut row per (variant, n, seed).
    pub cut: bool,
    pub max_width: usize,
    pub noise: NoiseModel,
    pub run_seed: u64,
    pub workers: usize,
}

impl Default for BenchmarkSweep {
    fn default() -> Self {
        BenchmarkSweep {
            n_min: 2,
            n_max: 8,
            seeds: 100,
            variants: vec![Variant::Original, Variant::Modified],
            cut: false,
            max_width: 5,
            noise: NoiseModel::default(),
            run_seed: 0,
            workers: 1,
        }
    }
}

/// The data vector a benchmark seed selects: `2^n` uniform values in
/// (0, 1].
pub fn benchmark_input(run_seed: u64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SampleRng::new(derive_seed(run_seed, &[n as u64, seed]));
    (0..1usize << n).map(|_| 1.0 - rng.uniform()).collect()
}

struct Point {
    variant: Variant,
    n: usize,
    cut: bool,
    qhed: Circuit,
    layout: RegisterLayout,
    metrics: CircuitMetrics,
    /// Greedy plan of the prepared circuit, for cut points.
    cuts: Option<CutPlan>,
}

/// One row per (variant, n, cut, seed), in that nesting order.
pub fn run_benchmark(sweep: &BenchmarkSweep) -> Result<Vec<MetricsRecord>> {
    if sweep.n_min < 2 || sweep.n_min > sweep.n_max || sweep.n_max > 20 {
        return Err(Error::Config(format!("qubit range {}..={} invalid", sweep.n_min, sweep.n_max)));
    }
    if sweep.max_width < 2 {
        return Err(Error::Config("max_width must be at least 2".into()));
    }
    sweep.noise.validate()?;
    let mut points = Vec::new();
    for &variant in &sweep.variants {
        for n in sweep.n_min..=sweep.n_max {
            let (q, layout) = build_qhed(n, variant.decrement())?;
            let qhed = transpile(&q, McxStrategy::GrayCode)?;
            let metrics = compute_metrics(&qhed)?;
            points.push(Point {
                variant,
                n,
                cut: false,
                qhed: qhed.clone(),
                layout: layout.clone(),
                metrics,
                cuts: None,
            });
            if sweep.cut {
                let template = prepared_qhed(&vec![1.0; 1 << n], &qhed, &layout)?;
                let plan = plan_cuts(&template, sweep.max_width, None)?;
                let first = crate::cutting::CutTerm {
                    coefficient: 1.0,
                    choices: vec![crate::cutting::CUT_CHOICES[0]; plan.cuts.len()],
                };
                let metrics = fragment_metrics(&plan, &first)?;
                points.push(Point { variant, n, cut: true, qhed, layout, metrics, cuts: Some(plan) });
            }
        }
    }
    let items: Vec<(JobId, (&Point, u64))> = points
        .iter()
        .enumerate()
        .flat_map(|(p, point)| (0..sweep.seeds).map(move |s| (JobId::new(p, s as usize, 0), (point, s))))
        .collect();
    let rows = execute_parallel(&items, sweep.workers, |&(point, seed)| row(sweep, point, seed))?;
    Ok(rows.into_values().collect())
}

fn row(sweep: &BenchmarkSweep, point: &Point, seed: u64) -> Result<MetricsRecord> {
    let data = benchmark_input(sweep.run_seed, point.n, seed);
    let result = match &point.cuts {
        None => uncut_fidelity(point, &data, &sweep.noise),
        Some(plan) => cut_fidelity(point, plan, &data, &sweep.noise),
    };
    let (fidelity, note) = match result {
        Ok(f) => (Some(f), None),
        Err(Error::Resource(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(MetricsRecord {
        variant: point.variant,
        n_encode: point.n,
        cut: point.cut,
        seed,
        depth: point.metrics.depth,
        cx_count: point.metrics.cx_count,
        gate_count: point.metrics.gate_count,
        fidelity,
        note,
    })
}

/// Ideal QHED output on `data`, as (state of the output register, its
/// Z-basis distribution). Ancillas end in |0⟩, so the output register is
/// the low `n + 1` wires.
fn ideal_output(point: &Point, data: &[f64]) -> Result<Statevector> {
    let input = Statevector::from_real(data)?.tensor(&Statevector::zero(1)?);
    let psi = run_circuit(&input.extended(point.layout.width())?, &point.qhed)?;
    Statevector::from_normalized(psi.amplitudes()[..2 << point.n].to_vec())
}

/// Uhlmann fidelity of the noisy output register against the ideal one,
/// starting from the directly initialized data state.
fn uncut_fidelity(point: &Point, data: &[f64], noise: &NoiseModel) -> Result<f64> {
    let width = point.layout.width();
    if width > DENSITY_MATRIX_LIMIT {
        return Err(Error::Resource(format!("{width} wires above the density-matrix limit {DENSITY_MATRIX_LIMIT}")));
    }
    let input = Statevector::from_real(data)?.tensor(&Statevector::zero(1)?);
    let noisy = run_noisy_reduced(&point.qhed, noise, &input, &point.layout.output_wires())?;
    fidelity(&noisy, &DensityMatrix::from_pure(&ideal_output(point, data)?))
}

/// Classical fidelity of the knitted output distribution, every fragment
/// run under noise from |0…0⟩ with the encoding circuit in front.
fn cut_fidelity(point: &Point, template: &CutPlan, data: &[f64], noise: &NoiseModel) -> Result<f64> {
    if template.cuts.len() > CUT_FIDELITY_BUDGET {
        return Err(Error::Resource(format!(
            "{} cuts above the knitting budget of {CUT_FIDELITY_BUDGET}",
            template.cuts.len()
        )));
    }
    let circuit = prepared_qhed(data, &point.qhed, &point.layout)?;
    let plan = plan_cuts(&circuit, template.max_width, Some(&template.cuts))?;
    let terms = enumerate_terms(&plan)?;
    let mut dists = BTreeMap::new();
    for (t, term) in terms.iter().enumerate() {
        for f in 0..plan.fragments.len() {
            let frag = instantiate_fragment(&plan, term, f)?;
            let all: Vec<usize> = (0..frag.n_qubits()).collect();
            let rho = run_noisy_reduced(&frag, noise, &Statevector::zero(frag.n_qubits())?, &all)?;
            dists.insert((t, f), rho.diagonal());
        }
    }
    let knit = knit_z_distribution(&plan, &terms, &dists)?;
    let probs = knit.clamped.ok_or_else(|| Error::Aggregation("knitting returned no distribution".into()))?;
    let noisy = marginal(&probs, &point.layout.output_wires());
    classical_fidelity(&noisy, &ideal_output(point, data)?.z_probabilities())
}
