use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dnisq_core::circuit::{build_qhed, parse_circuit, DecrementVariant};
use dnisq_core::imaging::{parse_pgm, parse_qvol};
use tempfile::TempDir;

fn dnisq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnisq")).current_dir(dir).args(args).output().expect("spawn dnisq")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dnisq(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_pgm(path: &Path, w: usize, h: usize, f: impl Fn(usize, usize) -> u8) {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend((0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| f(x, y)));
    fs::write(path, bytes).unwrap();
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn square(x: usize, y: usize) -> u8 {
    if (4..12).contains(&x) && (5..13).contains(&y) {
        200
    } else {
        10
    }
}

/// Forward differences along rows and columns (trailing pixel 0), merged
/// by pointwise max, normalized and thresholded at 0.5.
fn classical_outline(w: usize, h: usize) -> Vec<bool> {
    let v = |x: usize, y: usize| square(x, y) as f64 / 255.0;
    let mut e = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let dx = if x + 1 < w { (v(x, y) - v(x + 1, y)).abs() } else { 0.0 };
            let dy = if y + 1 < h { (v(x, y) - v(x, y + 1)).abs() } else { 0.0 };
            e[x + w * y] = dx.max(dy);
        }
    }
    let max = e.iter().cloned().fold(0.0, f64::max);
    e.iter().map(|v| v / max >= 0.5).collect()
}

#[test]
fn square_gives_classical_outline() {
    let dir = TempDir::new().unwrap();
    write_pgm(&dir.path().join("square.pgm"), 16, 16, square);
    ok(dir.path(), &["edges", "--input", "square.pgm", "--qubits", "3", "--shots", "exact", "--out", "e.pgm"]);
    let map = parse_pgm(&fs::read(dir.path().join("e.pgm")).unwrap()).unwrap();
    let got: Vec<bool> = map.values().iter().map(|v| *v > 0.5).collect();
    assert_eq!(got, classical_outline(16, 16));
    assert!(got.iter().filter(|b| **b).count() > 20);
    for f in ["e.magnitude.pgm", "e.pgm.metrics.csv", "e.pgm.manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let m = manifest(&dir.path().join("e.pgm.manifest.json"));
    assert_eq!(m["command"], "edges");
    assert_eq!(m["config"]["variant"], "modified");
    assert_eq!(m["config"]["shots"], "exact");
    let csv = fs::read_to_string(dir.path().join("e.pgm.metrics.csv")).unwrap();
    assert!(csv.starts_with("variant,n_encode,cut,seed,depth,cx_count,gate_count,fidelity\nmodified,3,false,"));
}

#[test]
fn constant_image_is_all_black() {
    let dir = TempDir::new().unwrap();
    write_pgm(&dir.path().join("c.pgm"), 12, 9, |_, _| 137);
    for extra in [&["--shots", "exact"][..], &["--shots", "512", "--noise", "default"][..]] {
        let mut args = vec!["edges", "--input", "c.pgm", "--qubits", "2", "--out", "e.pgm"];
        args.extend_from_slice(extra);
        ok(dir.path(), &args);
        let bytes = fs::read(dir.path().join("e.pgm")).unwrap();
        let map = parse_pgm(&bytes).unwrap();
        assert_eq!(map.shape(), [12, 9, 1]);
        assert!(map.values().iter().all(|v| *v == 0.0), "{extra:?}");
    }
}

#[test]
fn bad_flag_exits_2_with_usage() {
    let dir = TempDir::new().unwrap();
    let out = dnisq(dir.path(), &["edges", "--input", "x.pgm", "--out", "y.pgm", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = dnisq(dir.path(), &["edges", "--input", "x.pgm", "--out", "y.pgm", "--shots", "lots"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_and_resource_errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dnisq(dir.path(), &["edges", "--input", "missing.pgm", "--out", "y.pgm"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));

    fs::write(dir.path().join("bad.pgm"), b"P5\n4 4\n255\n\x01").unwrap();
    assert_eq!(dnisq(dir.path(), &["edges", "--input", "bad.pgm", "--out", "y.pgm"]).status.code(), Some(2));

    // greedy cutting of a 5-qubit window at width 3 needs far more than the
    // term enumerator allows
    write_pgm(&dir.path().join("s.pgm"), 16, 16, square);
    let out = dnisq(dir.path(), &["edges", "--input", "s.pgm", "--max-width", "3", "--out", "y.pgm"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource error"));
}

#[test]
fn bench_row_count_and_repeatability() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str| {
        vec!["bench", "--min-qubits", "2", "--max-qubits", "5", "--seeds", "10", "--variants", "original,modified"]
            .into_iter()
            .chain(["--cut", "off", "--out", out])
            .collect::<Vec<_>>()
    };
    ok(dir.path(), &args("a.csv"));
    ok(dir.path(), &args("b.csv"));
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "variant,n_encode,cut,seed,depth,cx_count,gate_count,fidelity");
    assert_eq!(lines.len(), 81);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8 && !l.ends_with(',')));
    assert_eq!(manifest(&dir.path().join("a.csv.manifest.json"))["rows"], 80);
}

#[test]
fn bench_leaves_fidelity_blank_above_density_limit() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "bench",
            "--min-qubits",
            "11",
            "--max-qubits",
            "11",
            "--seeds",
            "1",
            "--variants",
            "modified",
            "--out",
            "w.csv",
        ],
    );
    let text = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("modified,11,false,0,") && row.ends_with(','), "{row}");
}

fn cut_demo_diff(dir: &Path, out: &str, extra: &[&str]) -> (f64, serde_json::Value) {
    let mut args = vec!["cut-demo", "--qubits", "2", "--observable", "odd-projector", "--out", out];
    args.extend_from_slice(extra);
    let stdout = ok(dir, &args);
    assert!(stdout.contains("uncut") && stdout.contains("knitted"));
    let m = manifest(&dir.join(format!("{out}.manifest.json")));
    (m["max_abs_diff"].as_f64().unwrap(), m)
}

#[test]
fn cut_demo_without_cuts_is_exact() {
    let dir = TempDir::new().unwrap();
    let (diff, m) = cut_demo_diff(dir.path(), "r.txt", &[]);
    assert_eq!(diff, 0.0);
    assert_eq!(m["uncut"], m["knitted"]);
    assert_eq!(m["cuts"].as_array().unwrap().len(), 0);
}

#[test]
fn cut_demo_with_one_cut_matches_uncut() {
    let dir = TempDir::new().unwrap();
    // after the opening Hadamard on the redundant qubit, following the
    // five-gate encoding
    fs::write(dir.path().join("one.cuts"), "CUT 0 6\n").unwrap();
    let (diff, m) = cut_demo_diff(dir.path(), "r.txt", &["--cuts", "one.cuts"]);
    assert!(diff < 1e-9, "{diff}");
    assert_eq!(m["cuts"].as_array().unwrap().len(), 1);
    let report = fs::read_to_string(dir.path().join("r.txt")).unwrap();
    assert!(report.contains("fragments: 2  terms: 8"));
    let metrics = fs::read_to_string(dir.path().join("r.txt.metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 3);
    assert_eq!(fs::read_to_string(dir.path().join("r.txt.cuts")).unwrap(), "CUT 0 6\n");
}

#[test]
fn cut_demo_rejects_unknown_observable() {
    let dir = TempDir::new().unwrap();
    let out = dnisq(dir.path(), &["cut-demo", "--observable", "energy", "--out", "r.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

/// Unitary DFT with the positive exponent, written as `re:im` CSV.
fn kspace_csv(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for x in rows {
        let n = x.len();
        let entries: Vec<String> = (0..n)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, v) in x.iter().enumerate() {
                    let t = 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    re += v * t.cos();
                    im += v * t.sin();
                }
                let s = (n as f64).sqrt();
                format!("{:?}:{:?}", re / s, im / s)
            })
            .collect();
        out.push_str(&entries.join(","));
        out.push('\n');
    }
    out
}

#[test]
fn kspace_round_trip() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<Vec<f64>> = (0..5)
        .map(|r| (0..16).map(|j| 0.1 + 0.05 * r as f64 + if (5..11).contains(&j) { 0.7 } else { 0.0 }).collect())
        .collect();
    fs::write(dir.path().join("k.csv"), kspace_csv(&rows)).unwrap();
    ok(dir.path(), &["kspace", "--input", "k.csv", "--qubits", "3", "--shots", "exact", "--out", "k.pgm"]);
    let rec = parse_qvol(&fs::read(dir.path().join("k.recovered.qvol")).unwrap()).unwrap();
    assert_eq!(rec.shape(), [16, 5, 1]);
    let err = rec.values().iter().zip(rows.concat()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-9, "{err}");
    let edges = parse_pgm(&fs::read(dir.path().join("k.pgm")).unwrap()).unwrap();
    for y in 0..5 {
        let on: Vec<usize> = (0..16).filter(|&x| edges.get(x, y, 0) > 0.5).collect();
        assert_eq!(on, vec![4, 10], "row {y}");
    }
    assert_eq!(manifest(&dir.path().join("k.pgm.manifest.json"))["command"], "kspace");
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = TempDir::new().unwrap();
    write_pgm(&dir.path().join("s.pgm"), 16, 8, |x, y| ((x * 13 + y * 7) % 256) as u8);
    let run = |workers: &str, out: &str| {
        ok(
            dir.path(),
            &[
                "edges",
                "--input",
                "s.pgm",
                "--qubits",
                "3",
                "--shots",
                "256",
                "--seed",
                "9",
                "--workers",
                workers,
                "--out",
                out,
            ],
        );
        fs::read(dir.path().join(out)).unwrap()
    };
    let one = run("1", "a.pgm");
    assert_eq!(one, run("4", "b.pgm"));
    assert_eq!(
        fs::read(dir.path().join("a.magnitude.pgm")).unwrap(),
        fs::read(dir.path().join("b.magnitude.pgm")).unwrap()
    );
}

#[test]
fn volume_input_writes_volume_output() {
    let dir = TempDir::new().unwrap();
    let shape = [8usize, 4, 4];
    let values: Vec<f64> =
        (0..shape.iter().product::<usize>()).map(|i| if (i % 8) >= 4 && (i / 32) >= 2 { 1.0 } else { 0.0 }).collect();
    fs::write(dir.path().join("v.qvol"), dnisq_core::imaging::write_qvol(shape, &values)).unwrap();
    ok(dir.path(), &["edges", "--input", "v.qvol", "--qubits", "2", "--shots", "exact", "--out", "e.qvol"]);
    let out = parse_qvol(&fs::read(dir.path().join("e.qvol")).unwrap()).unwrap();
    assert_eq!(out.shape(), shape);
    assert!(out.values().iter().any(|v| *v > 0.0));
    let m = manifest(&dir.path().join("e.qvol.manifest.json"));
    assert_eq!(m["axes"], serde_json::json!(["row", "column", "depth"]));

    let out = dnisq(dir.path(), &["edges", "--input", "v.qvol", "--axis", "depth", "--qubits", "2", "--out", "d.qvol"]);
    assert!(out.status.success());
}

#[test]
fn dump_circuit_round_trips() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["dump-circuit", "--qubits", "4", "--variant", "original", "--out", "raw.txt"]);
    ok(dir.path(), &["dump-circuit", "--qubits", "4", "--lowered", "--prepared", "--seed", "3", "--out", "low.txt"]);
    let raw = parse_circuit(&fs::read_to_string(dir.path().join("raw.txt")).unwrap()).unwrap();
    let low = parse_circuit(&fs::read_to_string(dir.path().join("low.txt")).unwrap()).unwrap();
    assert_eq!(raw.n_qubits(), 5);
    let (_, layout) = build_qhed(4, DecrementVariant::Ancilla).unwrap();
    assert_eq!(low.n_qubits(), layout.width());
    assert!(low.gates().iter().all(|g| g.width() <= 2));
    let m = manifest(&dir.path().join("low.txt.manifest.json"));
    assert_eq!(m["gates"].as_u64().unwrap() as usize, low.len());
}
