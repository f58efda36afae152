//! Experiment configuration files (TOML, or JSON when the file ends in `.json`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ga::{self, GaConfig};
use crate::hqga::{self, ElitismMode, HqgaConfig};
use crate::market_data::DEFAULT_GAMMA;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Instance files or directories of `*.json` instance files.
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    /// Alternative to `instances`: sample subsets from a price file.
    pub sampling: Option<SamplingSpec>,
    pub repetitions: usize,
    /// Run seeds are `seed_base .. seed_base + repetitions`.
    #[serde(default)]
    pub seed_base: u64,
    pub algorithms: Vec<AlgorithmSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub universe: PathBuf,
    pub k: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub subset_seeds: Vec<u64>,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlgorithmSpec {
    Hqga(HqgaSpec),
    Ga(GaSpec),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HqgaSpec {
    pub populations: Vec<usize>,
    #[serde(default = "default_budget")]
    pub max_evaluations: u64,
    #[serde(default = "default_p_m")]
    pub p_m: f64,
    #[serde(default = "default_theta_m")]
    pub theta_m: f64,
    #[serde(default = "default_p_e")]
    pub p_e: f64,
    /// `deterministic`, `pure` or `reinforcement`.
    #[serde(default = "default_elitism")]
    pub elitism: String,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSpec {
    pub populations: Vec<usize>,
    #[serde(default = "default_budget")]
    pub max_evaluations: u64,
    #[serde(default = "default_p_c")]
    pub p_c: f64,
    #[serde(default = "default_p_m_bit")]
    pub p_m_bit: f64,
    #[serde(default = "default_tournament")]
    pub tournament_size: usize,
    #[serde(default = "default_elites")]
    pub elite_count: usize,
}

fn default_budget() -> u64 {
    hqga::DEFAULT_BUDGET
}
fn default_p_m() -> f64 {
    hqga::DEFAULT_P_M
}
fn default_theta_m() -> f64 {
    hqga::DEFAULT_THETA_M
}
fn default_p_e() -> f64 {
    hqga::DEFAULT_P_E
}
fn default_elitism() -> String {
    "deterministic".into()
}
fn default_epsilon() -> f64 {
    hqga::DEFAULT_EPSILON
}
fn default_p_c() -> f64 {
    ga::DEFAULT_P_C
}
fn default_p_m_bit() -> f64 {
    ga::DEFAULT_P_M_BIT
}
fn default_tournament() -> usize {
    ga::DEFAULT_TOURNAMENT
}
fn default_elites() -> usize {
    ga::DEFAULT_ELITES
}

impl AlgorithmSpec {
    pub fn populations(&self) -> &[usize] {
        match self {
            AlgorithmSpec::Hqga(s) => &s.populations,
            AlgorithmSpec::Ga(s) => &s.populations,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Hqga(_) => "hqga",
            AlgorithmSpec::Ga(_) => "ga",
        }
    }
}

impl HqgaSpec {
    pub fn elitism_mode(&self) -> Result<ElitismMode> {
        match self.elitism.as_str() {
            "deterministic" => Ok(ElitismMode::Deterministic),
            "pure" => Ok(ElitismMode::Pure),
            "reinforcement" => Ok(ElitismMode::Reinforcement {
                epsilon: self.epsilon,
            }),
            other => Err(Error::InvalidConfig(format!("unknown elitism mode {other:?}"))),
        }
    }

    pub fn config(&self, genes: usize, population_size: usize, seed: u64) -> Result<HqgaConfig> {
        let cfg = HqgaConfig {
            population_size,
            genes,
            p_m: self.p_m,
            theta_m: self.theta_m,
            p_e: self.p_e,
            elitism: self.elitism_mode()?,
            max_evaluations: self.max_evaluations,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl GaSpec {
    pub fn config(&self, genes: usize, population_size: usize, seed: u64) -> Result<GaConfig> {
        let cfg = GaConfig {
            population_size,
            genes,
            p_c: self.p_c,
            p_m_bit: self.p_m_bit,
            tournament_size: self.tournament_size,
            elite_count: self.elite_count,
            max_evaluations: self.max_evaluations,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// Parse a config file and resolve relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.check_files()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in &mut self.instances {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(s) = &mut self.sampling {
            if s.universe.is_relative() {
                s.universe = base.join(&s.universe);
            }
        }
    }

    /// Structural checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1");
        }
        match (&self.sampling, self.instances.is_empty()) {
            (None, true) => return bad("either `instances` or `sampling` is required"),
            (Some(_), false) => return bad("`instances` and `sampling` are mutually exclusive"),
            (Some(s), true) if s.k == 0 || s.subset_seeds.is_empty() => {
                return bad("sampling needs k >= 1 and at least one subset seed")
            }
            _ => {}
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required");
        }
        for alg in &self.algorithms {
            if alg.populations().is_empty() {
                return bad("every algorithm needs at least one population size");
            }
            if alg.populations().iter().any(|&n| n < 2) {
                return bad("population sizes must be >= 2");
            }
            if let AlgorithmSpec::Hqga(h) = alg {
                h.elitism_mode()?;
            }
        }
        Ok(())
    }

    fn check_files(&self) -> Result<()> {
        let missing = |p: &Path| Error::io(p, std::io::Error::from(std::io::ErrorKind::NotFound));
        for p in &self.instances {
            if !p.exists() {
                return Err(missing(p));
            }
        }
        if let Some(s) = &self.sampling {
            if !s.universe.exists() {
                return Err(missing(&s.universe));
            }
        }
        Ok(())
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.repetitions as u64).map(move |r| self.seed_base + r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
repetitions = 3
seed_base = 100

[sampling]
universe = "prices.csv"
k = 9
subset_seeds = [1, 2]

[[algorithms]]
kind = "hqga"
populations = [3]
elitism = "pure"

[[algorithms]]
kind = "ga"
populations = [3, 5]
p_m_bit = 0.1
"#;

    #[test]
    fn parses_toml_with_defaults() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.seeds().collect::<Vec<_>>(), vec![100, 101, 102]);
        let s = cfg.sampling.as_ref().unwrap();
        assert_eq!(s.gamma, 1.0);
        match &cfg.algorithms[0] {
            AlgorithmSpec::Hqga(h) => {
                assert_eq!(h.elitism_mode().unwrap(), ElitismMode::Pure);
                assert_eq!(h.max_evaluations, 512);
                assert_eq!(h.p_e, 0.5);
            }
            _ => panic!("expected hqga"),
        }
        match &cfg.algorithms[1] {
            AlgorithmSpec::Ga(g) => {
                assert_eq!(g.p_m_bit, 0.1);
                assert_eq!(g.tournament_size, 2);
                assert_eq!(g.config(9, 5, 1).unwrap().elite_count, 1);
            }
            _ => panic!("expected ga"),
        }
    }

    #[test]
    fn parses_json() {
        let cfg = ExperimentConfig::from_json(
            r#"{"instances": ["a.json"], "repetitions": 1,
                "algorithms": [{"kind": "ga", "populations": [4]}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.instances, vec![PathBuf::from("a.json")]);
    }

    #[test]
    fn rejects_invalid() {
        let cases = [
            SAMPLE.replace("repetitions = 3", "repetitions = 0"),
            SAMPLE.replace("populations = [3]", "populations = [1]"),
            SAMPLE.replace("\"pure\"", "\"quantum\""),
            SAMPLE.replace("kind = \"ga\"", "kind = \"sa\""),
            SAMPLE.replace("[sampling]", "instances = [\"x\"]\n[sampling]"),
            SAMPLE.replace("seed_base = 100", "seed_base = 100\nunknown = 1"),
        ];
        for text in cases {
            assert!(
                matches!(ExperimentConfig::from_toml(&text), Err(Error::InvalidConfig(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn missing_files_are_data_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, SAMPLE).unwrap();
        let err = ExperimentConfig::load(&path).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 2);
    }
}
