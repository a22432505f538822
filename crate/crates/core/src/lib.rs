//! Distributed quantum Hadamard edge detection on a classical simulator.
//!
//! Two independent decompositions keep every simulated circuit small:
//! images are split into overlapping windows ([`imaging`]), and circuits
//! wider than a cap are wire-cut into fragments ([`cutting`]). Every
//! (window, term, fragment) job runs on its own and results are folded
//! back in a fixed order ([`pipeline`]).

pub mod circuit;
pub mod cutting;
pub mod error;
pub mod imaging;
pub mod noise;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod transpile;

pub use circuit::{Circuit, Gate, GateKind};
pub use cutting::{CutPlan, CutPoint, CutTerm, KnitResult};
pub use error::{Error, ErrorKind, JobId, Result};
pub use imaging::{Axis, EdgeMap, ImageVolume, SubdomainPlan};
pub use noise::NoiseModel;
pub use pipeline::{BenchmarkSweep, RunConfig, Shots};
pub use sim::{DensityMatrix, QuantumState, Statevector};
pub use transpile::{CircuitMetrics, MetricsRecord, Variant};
