use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use num_complex::Complex64 as C64;
use serde_json::json;

use dnisq_core::circuit::{build_qhed, write_circuit};
use dnisq_core::cutting::{
    enumerate_terms, fragment_distribution, fragment_expectation, instantiate_fragment, knit_expectation,
    knit_z_distribution, parse_cut_manifest, plan_cuts, write_cut_manifest, ProductObservable,
};
use dnisq_core::imaging::{load_image, write_pgm, write_qvol, ImageFormat};
use dnisq_core::pipeline::{
    benchmark_input, prepared_qhed, run_benchmark, run_kspace_pipeline, run_qhed_pipeline, PipelineReport,
};
use dnisq_core::rng::derive_seed;
use dnisq_core::sim::{marginal, run_circuit};
use dnisq_core::transpile::{compute_metrics, transpile, McxStrategy};
use dnisq_core::{
    Axis, BenchmarkSweep, EdgeMap, MetricsRecord, NoiseModel, QuantumState, RunConfig, Shots, Statevector,
};

use crate::{BenchArgs, CutDemoArgs, DumpArgs, EdgesArgs, KspaceArgs, RunArgs};

/// `out` with `suffix` appended to the file name.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    out.with_file_name(name)
}

/// `dir/stem.<tag>.<ext>`.
fn tagged(out: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_manifest(out: &Path, manifest: serde_json::Value) -> anyhow::Result<PathBuf> {
    let path = sibling(out, ".manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write(&path, text)?;
    Ok(path)
}

fn read_cuts(path: &Path) -> anyhow::Result<Vec<dnisq_core::CutPoint>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_cut_manifest(&text).with_context(|| format!("cut manifest {}", path.display()))
}

fn run_config(run: &RunArgs) -> anyhow::Result<RunConfig> {
    let config = RunConfig {
        n_encode: run.qubits,
        variant: run.variant,
        noise: run.noise.load()?,
        shots: run.shots.0,
        max_width: run.max_width.0,
        cuts: run.cuts.as_deref().map(read_cuts).transpose()?,
        workers: run.workers,
        seed: run.seed,
        threshold: run.threshold,
    };
    config.validate()?;
    Ok(config)
}

/// PGM for a single slice, QVOL otherwise.
fn map_bytes(map: &EdgeMap) -> Vec<u8> {
    if map.shape()[2] == 1 {
        write_pgm(map)
    } else {
        write_qvol(map.shape(), map.values())
    }
}

fn map_ext(map: &EdgeMap) -> &'static str {
    if map.shape()[2] == 1 {
        "pgm"
    } else {
        "qvol"
    }
}

/// Binary map, magnitude map and metrics CSV next to `out`; returns the
/// manifest's `outputs` and `run` entries.
fn write_report(out: &Path, report: &PipelineReport) -> anyhow::Result<serde_json::Value> {
    let magnitude = tagged(out, "magnitude", map_ext(&report.edges));
    let metrics = sibling(out, ".metrics.csv");
    write(out, map_bytes(&report.binary))?;
    write(&magnitude, map_bytes(&report.edges))?;
    write(&metrics, MetricsRecord::to_csv(std::slice::from_ref(&report.metrics)))?;
    let edge_pixels = report.binary.values().iter().filter(|v| **v > 0.0).count();
    println!(
        "{} edge pixels of {}; windows={} terms={} fragments={} jobs={}",
        edge_pixels,
        report.binary.values().len(),
        report.windows,
        report.terms,
        report.fragments,
        report.jobs
    );
    Ok(json!({
        "outputs": {
            "edges": out,
            "magnitude": magnitude,
            "metrics": metrics,
        },
        "run": {
            "windows": report.windows,
            "terms": report.terms,
            "fragments": report.fragments,
            "jobs": report.jobs,
            "edge_pixels": edge_pixels,
        },
    }))
}

pub fn edges(args: EdgesArgs) -> anyhow::Result<()> {
    let format = ImageFormat::from_path(&args.input);
    let image = load_image(&args.input, format).with_context(|| format!("reading image {}", args.input.display()))?;
    let axes = args.axis.resolve(&image.axes())?;
    let config = run_config(&args.run)?;
    let report = run_qhed_pipeline(&image, &config, &axes)?;
    let written = write_report(&args.out, &report)?;
    write_manifest(
        &args.out,
        json!({
            "command": "edges",
            "input": args.input,
            "shape": image.shape(),
            "axes": axes,
            "config": config,
            "outputs": written["outputs"],
            "run": written["run"],
        }),
    )?;
    Ok(())
}

fn parse_complex(field: &str) -> Option<C64> {
    let field = field.trim();
    match field.split_once(':') {
        Some((re, im)) => Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?)),
        None => Some(C64::new(field.parse().ok()?, 0.0)),
    }
}

/// One k-space row per non-blank line, entries `re:im` (or plain `re`)
/// separated by commas.
fn parse_complex_csv(text: &str) -> anyhow::Result<Vec<Vec<C64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(j, f)| {
                parse_complex(f).with_context(|| format!("line {}, entry {}: bad value `{}`", i + 1, j + 1, f.trim()))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("no k-space rows");
    }
    Ok(rows)
}

fn load_kspace(path: &Path) -> anyhow::Result<Vec<Vec<C64>>> {
    let is_csv = path.extension().and_then(|e| e.to_str()) == Some("csv");
    if is_csv {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return parse_complex_csv(&text).with_context(|| format!("k-space CSV {}", path.display()));
    }
    let vol = load_image(path, ImageFormat::RawVol).with_context(|| format!("reading volume {}", path.display()))?;
    Ok((0..vol.line_count(Axis::Row))
        .map(|l| vol.line(Axis::Row, l).into_iter().map(|v| C64::new(v, 0.0)).collect())
        .collect())
}

pub fn kspace(args: KspaceArgs) -> anyhow::Result<()> {
    let rows = load_kspace(&args.input)?;
    let config = run_config(&args.run)?;
    let result = run_kspace_pipeline(&rows, &config)?;
    let recovered = tagged(&args.out, "recovered", "qvol");
    write(&recovered, write_qvol(result.image.shape(), result.image.values()))?;
    let written = write_report(&args.out, &result.report)?;
    write_manifest(
        &args.out,
        json!({
            "command": "kspace",
            "input": args.input,
            "rows": rows.len(),
            "row_length": rows[0].len(),
            "axes": [Axis::Row],
            "config": config,
            "outputs": {
                "recovered": recovered,
                "edges": written["outputs"]["edges"],
                "magnitude": written["outputs"]["magnitude"],
                "metrics": written["outputs"]["metrics"],
            },
            "run": written["run"],
        }),
    )?;
    Ok(())
}

pub fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let noise = args.noise.load()?.unwrap_or_else(NoiseModel::ideal);
    let mut variants = args.variants.clone();
    variants.sort();
    variants.dedup();
    let sweep = BenchmarkSweep {
        n_min: args.min_qubits,
        n_max: args.max_qubits,
        seeds: args.seeds,
        variants,
        cut: args.cut.0,
        max_width: args.max_width,
        noise,
        run_seed: args.seed,
        workers: args.workers,
    };
    let rows = run_benchmark(&sweep)?;
    write(&args.out, MetricsRecord::to_csv(&rows))?;
    let notes: BTreeMap<String, usize> =
        rows.iter().filter_map(|r| r.note.clone()).fold(BTreeMap::new(), |mut m, n| {
            *m.entry(n).or_default() += 1;
            m
        });
    for (note, count) in &notes {
        eprintln!("note ({count} rows): {note}");
    }
    println!("{} rows written to {}", rows.len(), args.out.display());
    write_manifest(
        &args.out,
        json!({
            "command": "bench",
            "min_qubits": sweep.n_min,
            "max_qubits": sweep.n_max,
            "seeds": sweep.seeds,
            "variants": sweep.variants,
            "cut": sweep.cut,
            "max_width": sweep.max_width,
            "noise": sweep.noise,
            "seed": sweep.run_seed,
            "workers": sweep.workers,
            "rows": rows.len(),
            "notes": notes,
            "outputs": { "csv": args.out },
        }),
    )?;
    Ok(())
}

pub fn cut_demo(args: CutDemoArgs) -> anyhow::Result<()> {
    if args.observable != "odd-projector" {
        bail!("unknown observable `{}` (odd-projector)", args.observable);
    }
    let (qhed, layout) = build_qhed(args.qubits, args.variant.decrement())?;
    let lowered = transpile(&qhed, McxStrategy::GrayCode)?;
    let data = benchmark_input(0, args.qubits, args.seed);
    let circuit = prepared_qhed(&data, &lowered, &layout)?;
    let width = circuit.n_qubits();
    let cap = args.max_width.0.unwrap_or(width);
    let manual = match (&args.cuts, args.max_width.0) {
        (Some(path), _) => Some(read_cuts(path)?),
        (None, Some(_)) => None,
        (None, None) => Some(Vec::new()),
    };
    let plan = plan_cuts(&circuit, cap, manual.as_deref())?;
    let terms = enumerate_terms(&plan)?;
    let shots = match args.shots.0 {
        Shots::Exact => None,
        Shots::Count(k) => Some(k),
    };

    let observable = ProductObservable::odd_projector(width);
    let mut distributions = BTreeMap::new();
    let mut expectations = BTreeMap::new();
    for (t, term) in terms.iter().enumerate() {
        for f in 0..plan.fragments.len() {
            let seed = derive_seed(args.seed, &[t as u64, f as u64]);
            let dist = fragment_distribution(&plan, term, f, shots, seed)?;
            expectations.insert((t, f), fragment_expectation(&plan, term, f, &dist, &observable)?);
            distributions.insert((t, f), dist);
        }
    }
    let knit_value = knit_expectation(&plan, &terms, &expectations)?.value.unwrap_or(f64::NAN);
    let knit = knit_z_distribution(&plan, &terms, &distributions)?;
    let knit_dist = knit.distribution.unwrap_or_default();

    let exact = run_circuit(&Statevector::zero(width)?, &circuit)?.z_probabilities();
    let diag = observable.diagonal(width);
    let uncut_value: f64 = exact.iter().zip(&diag).map(|(p, o)| p * o).sum();
    let output = layout.output_wires();
    let uncut_out = marginal(&exact, &output);
    let knit_out = marginal(&knit_dist, &output);
    let max_diff = uncut_out.iter().zip(&knit_out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut report = String::new();
    let _ = writeln!(
        report,
        "circuit: {} qubits, variant {}, {} wires, {} gates",
        args.qubits,
        args.variant.name(),
        width,
        circuit.len()
    );
    let _ = writeln!(
        report,
        "cuts: {}  fragments: {}  terms: {}  one-norm: {}",
        plan.cuts.len(),
        plan.fragments.len(),
        terms.len(),
        knit.one_norm
    );
    for c in &plan.cuts {
        let _ = writeln!(report, "  CUT {} {}", c.wire, c.position);
    }
    let _ = writeln!(report, "{:>8} {:>22} {:>22}", "state", "uncut", "knitted");
    for (i, (u, k)) in uncut_out.iter().zip(&knit_out).enumerate() {
        let _ = writeln!(report, "{i:>8} {u:>22.15e} {k:>22.15e}");
    }
    let _ = writeln!(report, "{:>8} {:>22.15e} {:>22.15e}", "odd", uncut_value, knit_value);
    let _ = writeln!(report, "max |uncut - knitted|: {:e}", max_diff.max((uncut_value - knit_value).abs()));
    print!("{report}");
    write(&args.out, &report)?;

    let metrics = sibling(&args.out, ".metrics.csv");
    let mut csv = String::from("fragment,width,depth,cx_count,gate_count\n");
    for (f, frag) in plan.fragments.iter().enumerate() {
        let m = compute_metrics(&instantiate_fragment(&plan, &terms[0], f)?)?;
        let _ = writeln!(csv, "{f},{},{},{},{}", frag.width(), m.depth, m.cx_count, m.gate_count);
    }
    write(&metrics, csv)?;
    let cuts_path = sibling(&args.out, ".cuts");
    write(&cuts_path, write_cut_manifest(&plan.cuts))?;
    write_manifest(
        &args.out,
        json!({
            "command": "cut-demo",
            "qubits": args.qubits,
            "variant": args.variant,
            "cuts": plan.cuts,
            "max_width": args.max_width.0,
            "observable": args.observable,
            "shots": args.shots.0,
            "seed": args.seed,
            "uncut": uncut_value,
            "knitted": knit_value,
            "max_abs_diff": max_diff,
            "outputs": { "report": args.out, "metrics": metrics, "cuts": cuts_path },
        }),
    )?;
    Ok(())
}

pub fn dump_circuit(args: DumpArgs) -> anyhow::Result<()> {
    let (qhed, layout) = build_qhed(args.qubits, args.variant.decrement())?;
    let mut circuit = if args.lowered { transpile(&qhed, McxStrategy::GrayCode)? } else { qhed };
    if args.prepared {
        circuit = prepared_qhed(&benchmark_input(0, args.qubits, args.seed), &circuit, &layout)?;
    }
    write(&args.out, write_circuit(&circuit))?;
    let summary = if args.lowered {
        let m = compute_metrics(&circuit)?;
        println!("{} gates, depth {}, cx {}", m.gate_count, m.depth, m.cx_count);
        json!(m)
    } else {
        println!("{} gates on {} wires", circuit.len(), circuit.n_qubits());
        serde_json::Value::Null
    };
    write_manifest(
        &args.out,
        json!({
            "command": "dump-circuit",
            "qubits": args.qubits,
            "variant": args.variant,
            "lowered": args.lowered,
            "prepared": args.prepared,
            "seed": args.seed,
            "wires": circuit.n_qubits(),
            "gates": circuit.len(),
            "metrics": summary,
            "outputs": { "circuit": args.out },
        }),
    )?;
    Ok(())
}
