//! Experiment metrics, aggregation and the file-based pipeline.

pub mod config;
pub mod pipeline;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::OPTIMUM_TOL;
use crate::record::{GenerationRecord, RunResult};

pub use config::ExperimentConfig;

/// f_max − f̄ over one generation's fitness values.
pub fn diversity(record: &GenerationRecord) -> Result<f64> {
    diversity_of(&record.fitnesses)
}

pub fn diversity_of(fitnesses: &[f64]) -> Result<f64> {
    if fitnesses.is_empty() {
        return Err(Error::EmptyGeneration);
    }
    let max = fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = fitnesses.iter().sum::<f64>() / fitnesses.len() as f64;
    Ok((max - mean).max(0.0))
}

/// One row of a run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    pub evaluations: u64,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    pub diversity: f64,
    pub best_so_far: f64,
}

/// The per-generation series of one run, as written to and read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub instance: String,
    pub pop: usize,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn from_run(run: &RunResult) -> Result<Self> {
        let rows = run
            .generations
            .iter()
            .map(|g| {
                Ok(TraceRow {
                    generation: g.generation,
                    evaluations: g.evaluations,
                    best: g.best,
                    mean: g.mean,
                    worst: g.worst,
                    diversity: diversity(g)?,
                    best_so_far: g.best_so_far,
                })
            })
            .collect::<Result<_>>()?;
        Ok(RunTrace {
            algorithm: run.algorithm.to_string(),
            instance: run.instance.clone(),
            pop: run.population_size,
            seed: run.seed,
            rows,
        })
    }
}

/// Smallest cumulative evaluation count at which best-so-far is within
/// [`OPTIMUM_TOL`] of `f_star`.
pub fn evals_to_optimum(trace: &RunTrace, f_star: f64) -> Option<u64> {
    trace
        .rows
        .iter()
        .find(|r| r.best_so_far >= f_star - OPTIMUM_TOL)
        .map(|r| r.evaluations)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    Best,
    Mean,
    Worst,
    Diversity,
    BestSoFar,
}

impl Statistic {
    pub const REPORTED: [Statistic; 4] = [
        Statistic::Best,
        Statistic::Mean,
        Statistic::Worst,
        Statistic::Diversity,
    ];

    pub fn select(self, row: &TraceRow) -> f64 {
        match self {
            Statistic::Best => row.best,
            Statistic::Mean => row.mean,
            Statistic::Worst => row.worst,
            Statistic::Diversity => row.diversity,
            Statistic::BestSoFar => row.best_so_far,
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Statistic::Best => "convergence_best.csv",
            Statistic::Mean => "convergence_mean.csv",
            Statistic::Worst => "convergence_worst.csv",
            Statistic::Diversity => "diversity.csv",
            Statistic::BestSoFar => "convergence_best_so_far.csv",
        }
    }
}

/// Per-evaluation-count mean and population standard deviation across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedSeries {
    pub evaluations: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl AggregatedSeries {
    /// Trapezoidal area of the mean curve over the evaluation axis.
    pub fn area(&self) -> f64 {
        self.evaluations
            .windows(2)
            .zip(self.mean.windows(2))
            .map(|(e, m)| (e[1] - e[0]) as f64 * (m[0] + m[1]) / 2.0)
            .sum()
    }
}

pub fn aggregate(runs: &[RunTrace], statistic: Statistic) -> Result<AggregatedSeries> {
    let first = runs.first().ok_or(Error::EmptyGeneration)?;
    let evaluations: Vec<u64> = first.rows.iter().map(|r| r.evaluations).collect();
    if evaluations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridMismatch);
    }
    for run in &runs[1..] {
        if run.rows.len() != evaluations.len()
            || run
                .rows
                .iter()
                .zip(&evaluations)
                .any(|(r, &e)| r.evaluations != e)
        {
            return Err(Error::GridMismatch);
        }
    }
    let count = runs.len() as f64;
    let mut mean = Vec::with_capacity(evaluations.len());
    let mut std = Vec::with_capacity(evaluations.len());
    for i in 0..evaluations.len() {
        let m = runs.iter().map(|r| statistic.select(&r.rows[i])).sum::<f64>() / count;
        let var = runs
            .iter()
            .map(|r| (statistic.select(&r.rows[i]) - m).powi(2))
            .sum::<f64>()
            / count;
        mean.push(m);
        std.push(var.sqrt());
    }
    Ok(AggregatedSeries {
        evaluations,
        mean,
        std,
    })
}
