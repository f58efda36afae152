//! Generational GA baseline over the same bitstring encoding.
//!
//! Tournament selection, one-point crossover, per-bit flip mutation and
//! elitism. Elites keep their cached fitness, so a generation after the first
//! costs `N − elite_count` evaluations.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::market_data::ProblemInstance;
use crate::objective::{CountingEvaluator, Portfolio};
use crate::record::{Algorithm, GenerationRecord, RunResult};
use crate::rng;

pub const DEFAULT_TOURNAMENT: usize = 2;
pub const DEFAULT_P_C: f64 = 0.9;
pub const DEFAULT_P_M_BIT: f64 = 0.05;
pub const DEFAULT_ELITES: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub genes: usize,
    pub p_c: f64,
    pub p_m_bit: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub max_evaluations: u64,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(genes: usize, population_size: usize) -> Self {
        GaConfig {
            population_size,
            genes,
            p_c: DEFAULT_P_C,
            p_m_bit: DEFAULT_P_M_BIT,
            tournament_size: DEFAULT_TOURNAMENT,
            elite_count: DEFAULT_ELITES,
            max_evaluations: crate::hqga::DEFAULT_BUDGET,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 2 {
            return bad("population size must be >= 2".into());
        }
        if self.genes == 0 {
            return bad("chromosomes need at least one gene".into());
        }
        for (name, p) in [("p_c", self.p_c), ("p_m_bit", self.p_m_bit)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament size must lie in [1, {}], got {}",
                self.population_size, self.tournament_size
            ));
        }
        if self.elite_count >= self.population_size {
            return bad(format!(
                "elite count {} must be smaller than the population",
                self.elite_count
            ));
        }
        if self.max_evaluations < self.population_size as u64 {
            return bad(format!(
                "budget {} is smaller than one generation ({})",
                self.max_evaluations, self.population_size
            ));
        }
        Ok(())
    }
}

/// Swap suffixes from position `cut` on.
pub fn one_point_crossover(a: &Portfolio, b: &Portfolio, cut: usize) -> Result<(Portfolio, Portfolio)> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if cut == 0 || cut >= n {
        return Err(Error::InvalidConfig(format!(
            "cut {cut} outside [1, {}]",
            n.saturating_sub(1)
        )));
    }
    let (a, b) = (a.bits(), b.bits());
    let first = a[..cut].iter().chain(&b[cut..]).copied().collect();
    let second = b[..cut].iter().chain(&a[cut..]).copied().collect();
    Ok((Portfolio::new(first), Portfolio::new(second)))
}

pub fn bit_flip_mutation<R: Rng + ?Sized>(x: &Portfolio, p: f64, rng: &mut R) -> Portfolio {
    Portfolio::new(x.bits().iter().map(|&b| b ^ rng.gen_bool(p)).collect())
}

/// Index of the winner among `k` distinct uniformly drawn contestants.
pub fn tournament_index<R: Rng + ?Sized>(fitnesses: &[f64], k: usize, rng: &mut R) -> Result<usize> {
    let n = fitnesses.len();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "tournament size {k} for population {n}"
        )));
    }
    let mut contestants = index::sample(rng, n, k).into_vec();
    contestants.sort_unstable();
    let mut winner = contestants[0];
    for &c in &contestants[1..] {
        if fitnesses[c] > fitnesses[winner] {
            winner = c;
        }
    }
    Ok(winner)
}

pub fn tournament_select<'p, R: Rng + ?Sized>(
    population: &'p [Portfolio],
    fitnesses: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<&'p Portfolio> {
    if population.len() != fitnesses.len() {
        return Err(Error::DimensionMismatch {
            expected: population.len(),
            found: fitnesses.len(),
        });
    }
    Ok(&population[tournament_index(fitnesses, k, rng)?])
}

/// Build the next population: elites first (cached fitness), then offspring.
///
/// Accepts `elite_count == N`, in which case nothing is evaluated and the
/// population is carried over unchanged.
pub fn next_generation<R: Rng + ?Sized>(
    population: &[Portfolio],
    fitnesses: &[f64],
    config: &GaConfig,
    evaluator: &mut CountingEvaluator<'_>,
    rng: &mut R,
) -> Result<(Vec<Portfolio>, Vec<f64>)> {
    let n = population.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));

    let elites = config.elite_count.min(n);
    let mut next: Vec<Portfolio> = order[..elites].iter().map(|&i| population[i].clone()).collect();
    let mut next_fit: Vec<f64> = order[..elites].iter().map(|&i| fitnesses[i]).collect();

    while next.len() < n {
        let a = tournament_select(population, fitnesses, config.tournament_size, rng)?.clone();
        let b = tournament_select(population, fitnesses, config.tournament_size, rng)?.clone();
        let genes = a.len();
        let (c, d) = if genes > 1 && rng.gen_bool(config.p_c) {
            one_point_crossover(&a, &b, rng.gen_range(1..genes))?
        } else {
            (a, b)
        };
        for child in [c, d] {
            if next.len() == n {
                break;
            }
            let child = bit_flip_mutation(&child, config.p_m_bit, rng);
            next_fit.push(evaluator.evaluate(&child)?);
            next.push(child);
        }
    }
    Ok((next, next_fit))
}

pub fn run_ga(instance: &ProblemInstance, config: &GaConfig) -> Result<RunResult> {
    config.validate()?;
    if instance.dim() != config.genes {
        return Err(Error::DimensionMismatch {
            expected: config.genes,
            found: instance.dim(),
        });
    }
    let mut rng = rng::seeded(config.seed);
    let mut evaluator = CountingEvaluator::new(instance);

    let mut population: Vec<Portfolio> = (0..config.population_size)
        .map(|_| Portfolio::new((0..config.genes).map(|_| rng.gen_bool(0.5)).collect()))
        .collect();
    let mut fitnesses = population
        .iter()
        .map(|x| evaluator.evaluate(x))
        .collect::<Result<Vec<_>>>()?;

    let mut best_index = argmax(&fitnesses);
    let mut best = population[best_index].clone();
    let mut best_value = fitnesses[best_index];
    let mut generations = vec![GenerationRecord::new(
        0,
        evaluator.count(),
        population.clone(),
        fitnesses.clone(),
        best_value,
        None,
    )];

    let per_generation = (config.population_size - config.elite_count) as u64;
    while evaluator.count() + per_generation <= config.max_evaluations {
        let (p, f) = next_generation(&population, &fitnesses, config, &mut evaluator, &mut rng)?;
        population = p;
        fitnesses = f;
        best_index = argmax(&fitnesses);
        if fitnesses[best_index] > best_value {
            best_value = fitnesses[best_index];
            best = population[best_index].clone();
        }
        generations.push(GenerationRecord::new(
            generations.len(),
            evaluator.count(),
            population.clone(),
            fitnesses.clone(),
            best_value,
            None,
        ));
    }

    Ok(RunResult {
        algorithm: Algorithm::Ga,
        instance: instance.label.clone(),
        population_size: config.population_size,
        seed: config.seed,
        generations,
        best,
        best_value,
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
