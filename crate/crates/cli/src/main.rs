//! `dnisq`: batch front end for the decomposed edge-detection pipeline.
//!
//! Exit status: 0 success, 2 bad input (flags, files, config), 3 a size
//! limit was hit, 4 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dnisq_core::transpile::Variant;
use dnisq_core::ErrorKind;

mod commands;
mod values;

use values::{AxisChoice, MaxWidth, NoiseChoice, ShotsChoice, Switch};

#[derive(Parser, Debug)]
#[command(name = "dnisq", version, about = "Quantum Hadamard edge detection with data and circuit decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Edge map of a PGM image or QVOL volume.
    Edges(EdgesArgs),
    /// Recover image rows from k-space through the IQFT, then detect edges.
    Kspace(KspaceArgs),
    /// Depth / CX / gate-count / fidelity sweep written as CSV.
    Bench(BenchArgs),
    /// Knit a cut QHED circuit and print knitted next to uncut values.
    CutDemo(CutDemoArgs),
    /// Write a QHED circuit in the text format.
    DumpCircuit(DumpArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Qubits per encoded window (window = 2^m pixels).
    #[arg(long = "qubits", default_value_t = 5)]
    qubits: usize,
    #[arg(long, default_value = "modified")]
    variant: Variant,
    /// Noise model file (`p1=…`, `p2=…`, `p_readout=…`) or `off`.
    #[arg(long, default_value = "off")]
    noise: NoiseChoice,
    /// Shots per job, or `exact`.
    #[arg(long, default_value = "4096")]
    shots: ShotsChoice,
    /// Widest circuit fragment, or `off` to never cut.
    #[arg(long = "max-width", default_value = "off")]
    max_width: MaxWidth,
    /// Manual cut manifest (`CUT wire position` lines) for the window circuit.
    #[arg(long)]
    cuts: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args, Debug)]
struct EdgesArgs {
    #[arg(long)]
    input: PathBuf,
    /// row, col or all (every axis with lines of two or more pixels).
    #[arg(long, default_value = "all")]
    axis: AxisChoice,
    #[command(flatten)]
    run: RunArgs,
    /// Thresholded edge map (PGM for 2D input, QVOL for 3D).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct KspaceArgs {
    /// Complex CSV (`re:im` entries, one row per line) or a QVOL volume.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long = "min-qubits", default_value_t = 2)]
    min_qubits: usize,
    #[arg(long = "max-qubits", default_value_t = 8)]
    max_qubits: usize,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',', default_value = "original,modified")]
    variants: Vec<Variant>,
    #[arg(long, default_value = "off")]
    cut: Switch,
    #[arg(long = "max-width", default_value_t = 5)]
    max_width: usize,
    /// Noise model file, `default`, or `off`.
    #[arg(long, default_value = "default")]
    noise: NoiseChoice,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CutDemoArgs {
    #[arg(long = "qubits", default_value_t = 3)]
    qubits: usize,
    #[arg(long, default_value = "original")]
    variant: Variant,
    /// Cut manifest; without it the circuit is cut greedily when
    /// `--max-width` is set, and not at all otherwise.
    #[arg(long)]
    cuts: Option<PathBuf>,
    #[arg(long = "max-width", default_value = "off")]
    max_width: MaxWidth,
    #[arg(long, default_value = "odd-projector")]
    observable: String,
    #[arg(long, default_value = "exact")]
    shots: ShotsChoice,
    /// Selects the encoded data vector.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Text report (also printed).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long = "qubits")]
    qubits: usize,
    #[arg(long, default_value = "modified")]
    variant: Variant,
    /// Lower to CX and one-qubit gates.
    #[arg(long)]
    lowered: bool,
    /// Prefix the encoding of the seed-selected data vector, giving the
    /// circuit `cut-demo` cuts.
    #[arg(long)]
    prepared: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let kind = err.chain().find_map(|e| e.downcast_ref::<dnisq_core::Error>()).map(|e| e.kind());
    match kind {
        Some(ErrorKind::Resource) => 3,
        Some(ErrorKind::Numerical) => 4,
        Some(ErrorKind::Input) | None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Edges(a) => commands::edges(a),
        Command::Kspace(a) => commands::kspace(a),
        Command::Bench(a) => commands::bench(a),
        Command::CutDemo(a) => commands::cut_demo(a),
        Command::DumpCircuit(a) => commands::dump_circuit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
