//! Hybrid quantum genetic algorithm.
//!
//! Each generation a fresh circuit is built on a ground-state register:
//!
//! 1. quantum elitism prepares the best chromosome slot from the stored
//!    incumbent,
//! 2. entangled crossover links a random subset of each other chromosome's
//!    genes to the same gene of the best chromosome through CX, and
//!    re-prepares the remaining ("free") genes to that individual's previous
//!    measured bit,
//! 3. Ry mutation rotates free qubits by ±θ_m with probability p_m.
//!
//! One measurement shot yields N bitstrings which are evaluated classically.
//! The run stops before a generation would exceed the evaluation budget.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::error::{Error, Result};
use crate::market_data::ProblemInstance;
use crate::objective::{CountingEvaluator, Portfolio};
use crate::qsim::QuantumRegister;
use crate::record::{Algorithm, GenerationRecord, RunResult};
use crate::rng;

pub const DEFAULT_POPULATION: usize = 3;
pub const DEFAULT_BUDGET: u64 = 512;
pub const DEFAULT_P_M: f64 = 0.5;
pub const DEFAULT_THETA_M: f64 = FRAC_PI_2;
pub const DEFAULT_P_E: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = PI / 16.0;

/// Maps (individual, gene) to a global qubit id `i·n + g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChromosomeLayout {
    population: usize,
    genes: usize,
}

impl ChromosomeLayout {
    pub fn new(population: usize, genes: usize) -> Result<Self> {
        if population < 2 {
            return Err(Error::InvalidConfig("population size must be >= 2".into()));
        }
        if genes == 0 {
            return Err(Error::InvalidConfig("chromosomes need at least one gene".into()));
        }
        Ok(ChromosomeLayout { population, genes })
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn genes(&self) -> usize {
        self.genes
    }

    pub fn num_qubits(&self) -> usize {
        self.population * self.genes
    }

    pub fn qubit(&self, individual: usize, gene: usize) -> usize {
        debug_assert!(individual < self.population && gene < self.genes);
        individual * self.genes + gene
    }

    fn check_register(&self, register: &QuantumRegister) -> Result<()> {
        if register.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits(),
                found: register.num_qubits(),
            });
        }
        Ok(())
    }

    fn check_individual(&self, individual: usize) -> Result<()> {
        if individual >= self.population {
            return Err(Error::InvalidConfig(format!(
                "individual {individual} out of range for population {}",
                self.population
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElitismMode {
    /// Re-prepare the stored single-qubit marginals of the best chromosome.
    Pure,
    /// Pure preparation, then rotate each qubit by `epsilon` toward x*.
    Reinforcement { epsilon: f64 },
    /// Prepare x* as a basis state.
    Deterministic,
}

impl ElitismMode {
    pub fn name(&self) -> &'static str {
        match self {
            ElitismMode::Pure => "pure",
            ElitismMode::Reinforcement { .. } => "reinforcement",
            ElitismMode::Deterministic => "deterministic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HqgaConfig {
    pub population_size: usize,
    pub genes: usize,
    pub p_m: f64,
    pub theta_m: f64,
    pub p_e: f64,
    pub elitism: ElitismMode,
    pub max_evaluations: u64,
    pub seed: u64,
}

impl HqgaConfig {
    pub fn new(genes: usize) -> Self {
        HqgaConfig {
            population_size: DEFAULT_POPULATION,
            genes,
            p_m: DEFAULT_P_M,
            theta_m: DEFAULT_THETA_M,
            p_e: DEFAULT_P_E,
            elitism: ElitismMode::Deterministic,
            max_evaluations: DEFAULT_BUDGET,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        ChromosomeLayout::new(self.population_size, self.genes)?;
        for (name, p) in [("p_m", self.p_m), ("p_e", self.p_e)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.theta_m > 0.0 && self.theta_m <= PI) {
            return bad(format!("theta_m must lie in (0, pi], got {}", self.theta_m));
        }
        if let ElitismMode::Reinforcement { epsilon } = self.elitism {
            if !(epsilon > 0.0 && epsilon < FRAC_PI_2) {
                return bad(format!("epsilon must lie in (0, pi/2), got {epsilon}"));
            }
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

/// Incumbent x* in both classical and quantum form.
#[derive(Debug, Clone, PartialEq)]
pub struct BestRecord {
    pub bits: Portfolio,
    pub value: f64,
    /// Ry angles reproducing the best chromosome's single-qubit marginals.
    pub prep_angles: Vec<f64>,
}

/// Outcome of [`select_best`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    /// Generation argmax, lowest index on ties.
    pub index: usize,
    /// Whether the generation's best strictly beats the incumbent.
    pub improved: bool,
}

/// Per-qubit flag: true where the qubit was linked to the best chromosome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntangledMask {
    layout: ChromosomeLayout,
    flags: Vec<bool>,
}

impl EntangledMask {
    fn new(layout: ChromosomeLayout) -> Self {
        EntangledMask {
            layout,
            flags: vec![false; layout.num_qubits()],
        }
    }

    pub fn is_entangled(&self, individual: usize, gene: usize) -> bool {
        self.flags[self.layout.qubit(individual, gene)]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Hadamard on every qubit.
pub fn init_population(register: &mut QuantumRegister, layout: &ChromosomeLayout) -> Result<()> {
    layout.check_register(register)?;
    for q in 0..layout.num_qubits() {
        register.h(q)?;
    }
    Ok(())
}

/// One shot over the whole register, split into chromosomes and evaluated.
pub fn measure_and_evaluate<R: Rng + ?Sized>(
    register: &mut QuantumRegister,
    layout: &ChromosomeLayout,
    evaluator: &mut CountingEvaluator<'_>,
    rng: &mut R,
) -> Result<(Vec<Portfolio>, Vec<f64>)> {
    layout.check_register(register)?;
    if evaluator.instance().dim() != layout.genes() {
        return Err(Error::DimensionMismatch {
            expected: layout.genes(),
            found: evaluator.instance().dim(),
        });
    }
    let bits = register.measure_all(rng);
    let bitstrings: Vec<Portfolio> = bits
        .chunks(layout.genes())
        .map(|chunk| Portfolio::new(chunk.to_vec()))
        .collect();
    let fitnesses = bitstrings
        .iter()
        .map(|x| evaluator.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    Ok((bitstrings, fitnesses))
}

/// Argmax of the generation; improvement is strict under maximization.
pub fn select_best(fitnesses: &[f64], incumbent: Option<f64>) -> Result<Selection> {
    let (index, &value) = fitnesses
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &f64)>, (i, f)| match acc {
            Some((_, best)) if *f <= *best => acc,
            _ => Some((i, f)),
        })
        .ok_or(Error::EmptyGeneration)?;
    let improved = incumbent.is_none_or(|inc| value > inc);
    Ok(Selection { index, improved })
}

/// Prepare the best chromosome slot on a ground-state register.
pub fn apply_elitism(
    register: &mut QuantumRegister,
    layout: &ChromosomeLayout,
    slot: usize,
    best: &BestRecord,
    mode: ElitismMode,
) -> Result<()> {
    layout.check_register(register)?;
    layout.check_individual(slot)?;
    let n = layout.genes();
    if best.bits.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: best.bits.len(),
        });
    }
    if mode != ElitismMode::Deterministic && best.prep_angles.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: best.prep_angles.len(),
        });
    }
    for g in 0..n {
        let q = layout.qubit(slot, g);
        match mode {
            ElitismMode::Deterministic => {
                if best.bits.get(g) {
                    register.x(q)?;
                }
            }
            ElitismMode::Pure => register.ry(q, best.prep_angles[g])?,
            ElitismMode::Reinforcement { epsilon } => {
                let theta = best.prep_angles[g];
                let toward = if best.bits.get(g) { epsilon } else { -epsilon };
                let target = (theta + toward).clamp(0.0, PI);
                register.ry(q, theta)?;
                register.ry(q, target - theta)?;
            }
        }
    }
    Ok(())
}

/// Link genes of every non-best chromosome to the best chromosome.
///
/// With probability `p_e` gene `g` of individual `i` becomes a CX target of
/// best gene `g` (target still in |0⟩, so it copies the best qubit's
/// outcome). Otherwise the gene is free and is re-prepared to
/// `previous[i]`'s bit.
pub fn entangled_crossover<R: Rng + ?Sized>(
    register: &mut QuantumRegister,
    layout: &ChromosomeLayout,
    slot: usize,
    previous: &[Portfolio],
    config: &HqgaConfig,
    rng: &mut R,
) -> Result<EntangledMask> {
    layout.check_register(register)?;
    layout.check_individual(slot)?;
    if previous.len() != layout.population() {
        return Err(Error::DimensionMismatch {
            expected: layout.population(),
            found: previous.len(),
        });
    }
    let mut mask = EntangledMask::new(*layout);
    for (i, prev) in previous.iter().enumerate() {
        if i == slot {
            continue;
        }
        if prev.len() != layout.genes() {
            return Err(Error::DimensionMismatch {
                expected: layout.genes(),
                found: prev.len(),
            });
        }
        for g in 0..layout.genes() {
            let target = layout.qubit(i, g);
            if rng.gen_bool(config.p_e) {
                mask.flags[target] = true;
                register.cx(layout.qubit(slot, g), target)?;
            } else if prev.get(g) {
                register.x(target)?;
            }
        }
    }
    Ok(mask)
}

/// Ry(±θ_m) on each free qubit of the non-best chromosomes with probability p_m.
pub fn ry_mutation<R: Rng + ?Sized>(
    register: &mut QuantumRegister,
    layout: &ChromosomeLayout,
    slot: usize,
    mask: &EntangledMask,
    config: &HqgaConfig,
    rng: &mut R,
) -> Result<()> {
    layout.check_register(register)?;
    layout.check_individual(slot)?;
    for i in (0..layout.population()).filter(|&i| i != slot) {
        for g in 0..layout.genes() {
            if mask.is_entangled(i, g) || !rng.gen_bool(config.p_m) {
                continue;
            }
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            register.ry(layout.qubit(i, g), sign * config.theta_m)?;
        }
    }
    Ok(())
}

/// θ_q = 2·asin(√P(1)) for each qubit of chromosome `individual`.
pub fn record_best_prep_angles(
    register: &QuantumRegister,
    layout: &ChromosomeLayout,
    individual: usize,
) -> Result<Vec<f64>> {
    layout.check_register(register)?;
    layout.check_individual(individual)?;
    (0..layout.genes())
        .map(|g| {
            let p1 = register.probability_of(layout.qubit(individual, g), true)?;
            Ok(2.0 * p1.sqrt().asin())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HqgaOutcome {
    pub run: RunResult,
    pub best: BestRecord,
}

pub fn run_hqga(instance: &ProblemInstance, config: &HqgaConfig) -> Result<HqgaOutcome> {
    config.validate()?;
    if instance.dim() != config.genes {
        return Err(Error::DimensionMismatch {
            expected: config.genes,
            found: instance.dim(),
        });
    }
    let layout = ChromosomeLayout::new(config.population_size, config.genes)?;
    let pop = layout.population();
    let mut rng = rng::seeded(config.seed);
    let mut evaluator = CountingEvaluator::new(instance);

    let mut register = QuantumRegister::new(layout.num_qubits())?;
    init_population(&mut register, &layout)?;
    let angles = all_prep_angles(&register, &layout)?;
    let (bitstrings, fitnesses) = measure_and_evaluate(&mut register, &layout, &mut evaluator, &mut rng)?;
    let sel = select_best(&fitnesses, None)?;
    let mut best = BestRecord {
        bits: bitstrings[sel.index].clone(),
        value: fitnesses[sel.index],
        prep_angles: angles[sel.index].clone(),
    };
    let mut slot = sel.index;
    let mut previous = bitstrings.clone();
    let mut generations = vec![GenerationRecord::new(
        0,
        evaluator.count(),
        bitstrings,
        fitnesses,
        best.value,
        None,
    )];

    while evaluator.count() + pop as u64 <= config.max_evaluations {
        let mut register = QuantumRegister::new(layout.num_qubits())?;
        apply_elitism(&mut register, &layout, slot, &best, config.elitism)?;
        let mask = entangled_crossover(&mut register, &layout, slot, &previous, config, &mut rng)?;
        ry_mutation(&mut register, &layout, slot, &mask, config, &mut rng)?;
        let angles = all_prep_angles(&register, &layout)?;

        let (bitstrings, fitnesses) = measure_and_evaluate(&mut register, &layout, &mut evaluator, &mut rng)?;
        let sel = select_best(&fitnesses, Some(best.value))?;
        if sel.improved {
            best = BestRecord {
                bits: bitstrings[sel.index].clone(),
                value: fitnesses[sel.index],
                prep_angles: angles[sel.index].clone(),
            };
        } else {
            // the elite slot's state is the quantum form of x* carried forward
            best.prep_angles = angles[slot].clone();
        }
        generations.push(GenerationRecord::new(
            generations.len(),
            evaluator.count(),
            bitstrings.clone(),
            fitnesses,
            best.value,
            Some(slot),
        ));
        slot = sel.index;
        previous = bitstrings;
    }

    Ok(HqgaOutcome {
        run: RunResult {
            algorithm: Algorithm::Hqga,
            instance: instance.label.clone(),
            population_size: pop,
            seed: config.seed,
            generations,
            best: best.bits.clone(),
            best_value: best.value,
        },
        best,
    })
}

fn all_prep_angles(register: &QuantumRegister, layout: &ChromosomeLayout) -> Result<Vec<Vec<f64>>> {
    (0..layout.population())
        .map(|i| record_best_prep_angles(register, layout, i))
        .collect()
}

/// P(1) after Ry(θ)|0⟩.
pub fn ry_one_probability(theta: f64) -> f64 {
    (theta / 2.0).sin().powi(2)
}
