//! Binary Markowitz objective, counted evaluation and exhaustive enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::ProblemInstance;

/// Largest dimension [`brute_force`] will enumerate.
pub const ENUMERATION_LIMIT: usize = 24;

/// Absolute tolerance for "reached the optimum" comparisons.
pub const OPTIMUM_TOL: f64 = 1e-12;

/// Inclusion vector x ∈ {0,1}^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Portfolio(Vec<bool>);

impl Portfolio {
    pub fn new(bits: Vec<bool>) -> Self {
        Portfolio(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Portfolio(vec![false; n])
    }

    /// Bits of `value` read big-endian: asset 0 is the most significant bit.
    pub fn from_index(value: u64, n: usize) -> Self {
        Portfolio((0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect())
    }

    /// Parse a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Schema(format!("invalid bit {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Portfolio)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl From<Vec<bool>> for Portfolio {
    fn from(bits: Vec<bool>) -> Self {
        Portfolio(bits)
    }
}

impl fmt::Display for Portfolio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Σ_i μ_i x_i − γ Σ_i Σ_j x_i σ_ij x_j, summed over all ordered pairs.
pub fn fitness(instance: &ProblemInstance, x: &Portfolio) -> Result<f64> {
    let n = instance.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let selected: Vec<usize> = (0..n).filter(|&i| x.get(i)).collect();
    let ret: f64 = selected.iter().map(|&i| instance.mu[i]).sum();
    let mut risk = 0.0;
    for &i in &selected {
        let row = &instance.sigma[i];
        for &j in &selected {
            risk += row[j];
        }
    }
    Ok(ret - instance.gamma * risk)
}

/// Fitness oracle that counts every call.
#[derive(Debug, Clone)]
pub struct CountingEvaluator<'a> {
    instance: &'a ProblemInstance,
    count: u64,
}

impl<'a> CountingEvaluator<'a> {
    pub fn new(instance: &'a ProblemInstance) -> Self {
        CountingEvaluator { instance, count: 0 }
    }

    pub fn evaluate(&mut self, x: &Portfolio) -> Result<f64> {
        let value = fitness(self.instance, x)?;
        self.count += 1;
        Ok(value)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn instance(&self) -> &ProblemInstance {
        self.instance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub best: Portfolio,
    pub best_value: f64,
    pub evaluations: u64,
}

/// Enumerate all 2^n portfolios in increasing big-endian order and keep the
/// first maximizer, so ties resolve to the lowest bitstring.
pub fn brute_force(instance: &ProblemInstance) -> Result<BruteForceResult> {
    let n = instance.dim();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut evaluator = CountingEvaluator::new(instance);
    let mut best = Portfolio::zeros(n);
    let mut best_value = f64::NEG_INFINITY;
    for index in 0..(1u64 << n) {
        let x = Portfolio::from_index(index, n);
        let value = evaluator.evaluate(&x)?;
        if value > best_value {
            best_value = value;
            best = x;
        }
    }
    Ok(BruteForceResult {
        best,
        best_value,
        evaluations: evaluator.count(),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;
    use crate::rng;

    fn instance(mu: Vec<f64>, sigma: Vec<Vec<f64>>, gamma: f64) -> ProblemInstance {
        let tickers = (0..mu.len()).map(|i| format!("A{i}")).collect();
        ProblemInstance::new("t", tickers, mu, sigma, gamma).unwrap()
    }

    fn diag(values: &[f64]) -> Vec<Vec<f64>> {
        (0..values.len())
            .map(|i| {
                (0..values.len())
                    .map(|j| if i == j { values[i] } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Random PSD matrix built as A·Aᵀ / n.
    fn random_instance(n: usize, gamma: f64, seed: u64) -> ProblemInstance {
        let mut r = rng::seeded(seed);
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| r.gen_range(-0.02..0.02)).collect())
            .collect();
        let mut sigma = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = (0..n).map(|k| a[i][k] * a[j][k]).sum::<f64>() / n as f64;
                sigma[i][j] = v;
                sigma[j][i] = v;
            }
        }
        let mu = (0..n).map(|_| r.gen_range(-0.002..0.004)).collect();
        instance(mu, sigma, gamma)
    }

    #[test]
    fn empty_portfolio_is_zero() {
        let inst = random_instance(6, 1.0, 3);
        assert_eq!(fitness(&inst, &Portfolio::zeros(6)).unwrap(), 0.0);
    }

    #[test]
    fn single_asset() {
        let inst = instance(vec![0.10], vec![vec![0.04]], 1.0);
        let v = fitness(&inst, &Portfolio::new(vec![true])).unwrap();
        assert!((v - 0.06).abs() < 1e-15);
    }

    #[test]
    fn off_diagonal_counted_twice() {
        let inst = instance(vec![0.0, 0.0], vec![vec![0.01, 0.01], vec![0.01, 0.01]], 1.0);
        let v = fitness(&inst, &Portfolio::new(vec![true, true])).unwrap();
        assert!((v + 0.04).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let inst = instance(vec![0.1, 0.2], diag(&[0.01, 0.01]), 1.0);
        assert!(matches!(
            fitness(&inst, &Portfolio::zeros(3)),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
        let mut ev = CountingEvaluator::new(&inst);
        assert!(ev.evaluate(&Portfolio::zeros(1)).is_err());
        assert_eq!(ev.count(), 0);
    }

    #[test]
    fn evaluator_counts() {
        let inst = random_instance(5, 1.0, 9);
        let mut ev = CountingEvaluator::new(&inst);
        assert_eq!(ev.count(), 0);
        let mut r = rng::seeded(1);
        for k in 1..=100u64 {
            let x = Portfolio::new((0..5).map(|_| r.gen_bool(0.5)).collect());
            let counted = ev.evaluate(&x).unwrap();
            assert_eq!(counted.to_bits(), fitness(&inst, &x).unwrap().to_bits());
            assert_eq!(ev.count(), k);
        }
    }

    #[test]
    fn brute_force_small_cases() {
        let inst = instance(vec![0.1, -0.2, 0.3], diag(&[0.01, 0.01, 0.01]), 0.0);
        let res = brute_force(&inst).unwrap();
        assert_eq!(res.best.to_string(), "101");
        assert!((res.best_value - 0.4).abs() < 1e-15);
        assert_eq!(res.evaluations, 8);

        let inst = instance(vec![0.0, 0.0], diag(&[0.04, 0.09]), 1.0);
        let res = brute_force(&inst).unwrap();
        assert_eq!(res.best.to_string(), "00");
        assert_eq!(res.best_value, 0.0);
    }

    #[test]
    fn brute_force_ties_pick_lowest() {
        // every portfolio scores zero
        let inst = instance(vec![0.0; 3], diag(&[0.0; 3]), 1.0);
        assert_eq!(brute_force(&inst).unwrap().best.to_string(), "000");
        // 010 and 001 both score 0.1; 011 pays the cross terms
        let inst = instance(
            vec![-1.0, 0.2, 0.2],
            vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.1, 0.1], vec![0.0, 0.1, 0.1]],
            1.0,
        );
        let res = brute_force(&inst).unwrap();
        assert_eq!(res.best.to_string(), "001");
    }

    #[test]
    fn enumeration_guard() {
        let inst = instance(vec![0.0; 25], diag(&[0.01; 25]), 1.0);
        assert!(matches!(
            brute_force(&inst),
            Err(Error::EnumerationTooLarge { n: 25, .. })
        ));
    }

    #[test]
    fn big_endian_index() {
        assert_eq!(Portfolio::from_index(5, 3).to_string(), "101");
        assert_eq!(Portfolio::from_index(1, 4).to_string(), "0001");
        assert_eq!(Portfolio::parse("0110").unwrap(), Portfolio::from_index(6, 4));
        assert!(Portfolio::parse("01x").is_err());
    }

    #[test]
    fn brute_force_dominates_random_portfolios() {
        let inst = random_instance(8, 2.0, 17);
        let res = brute_force(&inst).unwrap();
        let mut r = rng::seeded(99);
        for _ in 0..1000 {
            let x = Portfolio::new((0..8).map(|_| r.gen_bool(0.5)).collect());
            assert!(res.best_value >= fitness(&inst, &x).unwrap());
        }
    }

    proptest! {
        #[test]
        fn gamma_zero_monotone(seed in 0u64..500, bits in prop::collection::vec(any::<bool>(), 7), i in 0usize..7) {
            let inst = {
                let mut inst = random_instance(7, 0.0, seed);
                inst.gamma = 0.0;
                inst
            };
            let x = Portfolio::new(bits);
            let base = fitness(&inst, &x).unwrap();
            let mut y = x.clone();
            if inst.mu[i] > 0.0 {
                y.set(i, true);
            } else if inst.mu[i] < 0.0 {
                y.set(i, false);
            }
            prop_assert!(fitness(&inst, &y).unwrap() >= base);
        }

        #[test]
        fn permutation_invariant(seed in 0u64..500, bits in prop::collection::vec(any::<bool>(), 6), rot in 1usize..6) {
            let inst = random_instance(6, 1.5, seed);
            let perm: Vec<usize> = (0..6).map(|k| (k + rot) % 6).collect();
            let permuted = ProblemInstance::new(
                "p",
                perm.iter().map(|&p| inst.tickers[p].clone()).collect(),
                perm.iter().map(|&p| inst.mu[p]).collect(),
                perm.iter().map(|&p| perm.iter().map(|&q| inst.sigma[p][q]).collect()).collect(),
                inst.gamma,
            ).unwrap();
            let x = Portfolio::new(bits);
            let px = Portfolio::new(perm.iter().map(|&p| x.get(p)).collect());
            let a = fitness(&inst, &x).unwrap();
            let b = fitness(&permuted, &px).unwrap();
            prop_assert!((a - b).abs() < 1e-15);
        }
    }
}
