//! Per-generation telemetry shared by the HQGA and the classical GA.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::objective::Portfolio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hqga,
    Ga,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Hqga => "hqga",
            Algorithm::Ga => "ga",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "hqga" => Ok(Algorithm::Hqga),
            "ga" => Ok(Algorithm::Ga),
            other => Err(Error::Schema(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    /// 0-based generation index.
    pub generation: usize,
    /// Cumulative fitness evaluations after this generation.
    pub evaluations: u64,
    pub bitstrings: Vec<Portfolio>,
    pub fitnesses: Vec<f64>,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    /// Incumbent value after this generation has been evaluated.
    pub best_so_far: f64,
    /// Slot that carried the elite into this generation (HQGA, generation ≥ 1).
    pub elite_index: Option<usize>,
}

impl GenerationRecord {
    /// Panics on an empty generation; both engines always produce N ≥ 2
    /// individuals.
    pub fn new(
        generation: usize,
        evaluations: u64,
        bitstrings: Vec<Portfolio>,
        fitnesses: Vec<f64>,
        best_so_far: f64,
        elite_index: Option<usize>,
    ) -> Self {
        assert!(!fitnesses.is_empty(), "generation without individuals");
        let best = fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = (fitnesses.iter().sum::<f64>() / fitnesses.len() as f64).clamp(worst, best);
        GenerationRecord {
            generation,
            evaluations,
            bitstrings,
            fitnesses,
            best,
            mean,
            worst,
            best_so_far,
            elite_index,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub instance: String,
    pub population_size: usize,
    pub seed: u64,
    pub generations: Vec<GenerationRecord>,
    pub best: Portfolio,
    pub best_value: f64,
}

impl RunResult {
    pub fn total_evaluations(&self) -> u64 {
        self.generations.last().map_or(0, |g| g.evaluations)
    }

    pub fn best_so_far_trace(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best_so_far).collect()
    }
}
