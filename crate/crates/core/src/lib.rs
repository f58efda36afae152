//! Hybrid quantum genetic algorithm (HQGA) for binary mean-variance portfolio
//! selection, together with a classical GA baseline, a small cluster-factored
//! statevector simulator, an exhaustive-enumeration oracle and the experiment
//! harness used to compare them.
//!
//! Module map:
//!
//! * [`market_data`]: price ingestion, daily returns, (μ, Σ) estimation, instance files.
//! * [`objective`]: Markowitz fitness, evaluation counting, brute-force optimum.
//! * [`qsim`]: statevector simulator with H, X, Ry and CX.
//! * [`hqga`]: the hybrid quantum-classical evolutionary loop.
//! * [`ga`]: generational GA baseline.
//! * [`bench`]: metrics, aggregation and the prepare/brute/run/report pipeline.

pub mod bench;
pub mod error;
pub mod ga;
pub mod hqga;
pub mod market_data;
pub mod objective;
pub mod qsim;
pub mod record;
pub mod rng;

pub use error::{Error, Result};
pub use market_data::ProblemInstance;
pub use objective::{CountingEvaluator, Portfolio};
pub use record::{Algorithm, GenerationRecord, RunResult};
