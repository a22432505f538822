//! Orchestration of the two decompositions: windows × cut terms ×
//! fragments become independent jobs, run on a fixed-size pool and folded
//! back in job-id order.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::Circuit;
use crate::cutting::CutPoint;
use crate::error::{Error, JobId, Result};
use crate::noise::{run_noisy_reduced, NoiseModel};
use crate::sim::{counts_to_probabilities, marginal, run_circuit, sample_distribution, QuantumState, Statevector};
use crate::transpile::Variant;

mod bench;
mod edges;
mod kspace;

pub use bench::{benchmark_input, run_benchmark, BenchmarkSweep, CUT_FIDELITY_BUDGET};
pub use edges::{prepared_qhed, run_qhed_pipeline, PipelineReport};
pub use kspace::{recover_rows, run_kspace_pipeline, KspaceReport};

/// Shot budget per job: a fixed count, or exact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(u64),
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(IntOrWord { word: "exact" }).map(|v| v.map_or(Shots::Exact, Shots::Count))
    }
}

/// `max_width` in manifests: an integer, or `"uncut"`.
mod max_width_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(w) => s.serialize_u64(*w as u64),
            None => s.serialize_str("uncut"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<usize>, D::Error> {
        d.deserialize_any(IntOrWord { word: "uncut" }).map(|v| v.map(|w| w as usize))
    }
}

/// Accepts an unsigned integer or one keyword (mapped to `None`).
struct IntOrWord {
    word: &'static str,
}

impl Visitor<'_> for IntOrWord {
    type Value = Option<u64>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "an unsigned integer or \"{}\"", self.word)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
        Ok(Some(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
        u64::try_from(v).map(Some).map_err(|_| E::invalid_value(de::Unexpected::Signed(v), &self))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
        if v == self.word {
            Ok(None)
        } else {
            Err(E::invalid_value(de::Unexpected::Str(v), &self))
        }
    }
}

fn default_n_encode() -> usize {
    5
}
fn default_shots() -> Shots {
    Shots::Count(4096)
}
fn default_max_width() -> Option<usize> {
    Some(5)
}
fn default_workers() -> usize {
    1
}
fn default_threshold() -> f64 {
    0.5
}
fn default_variant() -> Variant {
    Variant::Modified
}

/// Settings of one pipeline run. Serialized as the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n_encode")]
    pub n_encode: usize,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    /// `None` runs noiseless statevectors.
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    #[serde(default = "default_shots")]
    pub shots: Shots,
    /// Widest fragment allowed; `None` never cuts.
    #[serde(default = "default_max_width", with = "max_width_serde")]
    pub max_width: Option<usize>,
    /// Manual cut points in the prepared window circuit (encoding then
    /// lowered QHED). Replaces greedy placement when set.
    #[serde(default)]
    pub cuts: Option<Vec<CutPoint>>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_encode: default_n_encode(),
            variant: default_variant(),
            noise: None,
            shots: default_shots(),
            max_width: default_max_width(),
            cuts: None,
            workers: default_workers(),
            seed: 0,
            threshold: default_threshold(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=20).contains(&self.n_encode) {
            return Err(Error::Config(format!("n_encode {} outside 2..=20", self.n_encode)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.shots == Shots::Count(0) {
            return Err(Error::Config("shots must be positive".into()));
        }
        if self.max_width.is_some_and(|w| w < 2) {
            return Err(Error::Config("max_width must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// One independent simulation: run `circuit` on `input` and report the
/// Z-basis distribution of `keep` (bit `i` of an outcome is `keep[i]`).
#[derive(Debug, Clone)]
pub struct Job {
    pub id: JobId,
    pub circuit: Circuit,
    pub input: Statevector,
    pub keep: Vec<usize>,
    pub shots: Shots,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    pub probabilities: Vec<f64>,
    /// Final amplitudes of the whole register; only for exact noiseless
    /// runs.
    pub amplitudes: Option<Vec<C64>>,
}

pub fn run_job(job: &Job, noise: Option<&NoiseModel>) -> Result<JobOutput> {
    let width = job.circuit.n_qubits().max(job.input.n_qubits());
    if let Some(w) = job.keep.iter().find(|&&w| w >= width) {
        return Err(Error::Shape(format!("kept wire {w} outside a {width}-wire job")));
    }
    let (probs, amplitudes) = match noise {
        None => {
            let psi = run_circuit(&job.input.extended(width)?, &job.circuit)?;
            let probs = marginal(&psi.z_probabilities(), &job.keep);
            let amps = (job.shots == Shots::Exact).then(|| psi.amplitudes().to_vec());
            (probs, amps)
        }
        Some(model) => (run_noisy_reduced(&job.circuit, model, &job.input, &job.keep)?.diagonal(), None),
    };
    let probabilities = match job.shots {
        Shots::Exact => probs,
        Shots::Count(n) => counts_to_probabilities(&sample_distribution(&probs, n, job.seed)?, probs.len()),
    };
    Ok(JobOutput { probabilities, amplitudes })
}

/// Runs `f` on every item with `workers` threads. Results come back keyed
/// by id; on failure the error of the smallest failing id is returned,
/// wrapped with that id.
pub fn execute_parallel<T, R, F>(items: &[(JobId, T)], workers: usize, f: F) -> Result<BTreeMap<JobId, R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some((id, _)) = items.iter().find(|(id, _)| !seen.insert(*id)) {
        return Err(Error::Precondition(format!("duplicate {id}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(JobId, Result<R>)> = pool.install(|| items.par_iter().map(|(id, t)| (*id, f(t))).collect());
    let mut out = BTreeMap::new();
    let mut first_err: Option<(JobId, Error)> = None;
    for (id, r) in results {
        match r {
            Ok(v) => {
                out.insert(id, v);
            }
            Err(e) => {
                if first_err.as_ref().is_none_or(|(fid, _)| id < *fid) {
                    first_err = Some((id, e));
                }
            }
        }
    }
    match first_err {
        Some((id, e)) => Err(Error::Job { id, source: Box::new(e) }),
        None => Ok(out),
    }
}

pub fn execute_jobs(jobs: &[Job], workers: usize, noise: Option<&NoiseModel>) -> Result<BTreeMap<JobId, JobOutput>> {
    let items: Vec<(JobId, &Job)> = jobs.iter().map(|j| (j.id, j)).collect();
    execute_parallel(&items, workers, |j| run_job(j, noise))
}
