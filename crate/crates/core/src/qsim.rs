//! Statevector simulator over a register factored into entanglement clusters.
//!
//! The global state is the tensor product of the clusters. A cluster holds the
//! joint amplitudes of its qubits; single-qubit gates act inside one cluster
//! and CX merges the control and target clusters first when they differ. The
//! HQGA only ever entangles gene `g` of the best chromosome with gene `g` of the
//! others, so clusters stay at most population-size wide.
//!
//! Inside a cluster, `qubit_ids[k]` corresponds to bit `k` (little-endian) of
//! the amplitude index.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Ry { qubit: usize, theta: f64 },
    Cx { control: usize, target: usize },
}

/// Jointly-stored qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub qubit_ids: Vec<usize>,
    pub amplitudes: Vec<Complex64>,
}

impl Cluster {
    fn basis(qubit: usize, bit: bool) -> Self {
        let amplitudes = if bit { vec![ZERO, ONE] } else { vec![ONE, ZERO] };
        Cluster {
            qubit_ids: vec![qubit],
            amplitudes,
        }
    }

    fn position(&self, qubit: usize) -> usize {
        self.qubit_ids
            .iter()
            .position(|&q| q == qubit)
            .expect("qubit belongs to cluster")
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn apply_2x2(&mut self, pos: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1usize << pos;
        for i in 0..self.amplitudes.len() {
            if i & stride == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | stride]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `self ⊗ other` with `other`'s qubits appended as the high bits.
    fn merge(self, other: Cluster) -> Cluster {
        let low = self.amplitudes.len();
        let mut amplitudes = Vec::with_capacity(low * other.amplitudes.len());
        for b in &other.amplitudes {
            for a in &self.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut qubit_ids = self.qubit_ids;
        qubit_ids.extend(other.qubit_ids);
        Cluster {
            qubit_ids,
            amplitudes,
        }
    }
}

/// Register of `num_qubits` qubits partitioned into clusters.
#[derive(Debug, Clone)]
pub struct QuantumRegister {
    num_qubits: usize,
    clusters: Vec<Cluster>,
    /// Index into `clusters` for every qubit.
    owner: Vec<usize>,
}

impl QuantumRegister {
    /// |0…0⟩ with every qubit in its own cluster.
    pub fn new(num_qubits: usize) -> Result<Self> {
        Self::from_bits(&vec![false; num_qubits])
    }

    /// Classical basis state, one singleton cluster per qubit.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyRegister);
        }
        Ok(QuantumRegister {
            num_qubits: bits.len(),
            clusters: bits
                .iter()
                .enumerate()
                .map(|(q, &b)| Cluster::basis(q, b))
                .collect(),
            owner: (0..bits.len()).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Cluster containing `qubit`.
    pub fn cluster_of(&self, qubit: usize) -> Result<&Cluster> {
        self.check(qubit)?;
        Ok(&self.clusters[self.owner[qubit]])
    }

    pub fn largest_cluster(&self) -> usize {
        self.clusters.iter().map(|c| c.qubit_ids.len()).max().unwrap_or(0)
    }

    /// Clusters ordered by their smallest qubit id, each with qubit ids and
    /// amplitudes. Intended for tests and debugging.
    pub fn dump(&self) -> Vec<(Vec<usize>, Vec<Complex64>)> {
        let mut out: Vec<_> = self
            .clusters
            .iter()
            .map(|c| (c.qubit_ids.clone(), c.amplitudes.clone()))
            .collect();
        out.sort_by_key(|(ids, _)| ids.iter().copied().min());
        out
    }

    fn check(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::H(q) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                self.apply_1q(q, [[h, h], [h, -h]])
            }
            Gate::X(q) => self.apply_1q(q, [[ZERO, ONE], [ONE, ZERO]]),
            Gate::Ry { qubit, theta } => {
                if !theta.is_finite() {
                    return Err(Error::NonFiniteAngle(theta));
                }
                let (s, c) = (theta / 2.0).sin_cos();
                let (s, c) = (Complex64::new(s, 0.0), Complex64::new(c, 0.0));
                self.apply_1q(qubit, [[c, -s], [s, c]])
            }
            Gate::Cx { control, target } => self.apply_cx(control, target),
        }
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.apply(Gate::H(q))
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.apply(Gate::X(q))
    }

    pub fn ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.apply(Gate::Ry { qubit: q, theta })
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply(Gate::Cx { control, target })
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check(q)?;
        let cluster = &mut self.clusters[self.owner[q]];
        let pos = cluster.position(q);
        cluster.apply_2x2(pos, m);
        Ok(())
    }

    fn apply_cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        self.merge_clusters(self.owner[control], self.owner[target]);
        let cluster = &mut self.clusters[self.owner[control]];
        let c = 1usize << cluster.position(control);
        let t = 1usize << cluster.position(target);
        for i in 0..cluster.amplitudes.len() {
            if i & c != 0 && i & t == 0 {
                cluster.amplitudes.swap(i, i | t);
            }
        }
        Ok(())
    }

    fn merge_clusters(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (keep, drop) = (a.min(b), a.max(b));
        let removed = self.clusters.swap_remove(drop);
        // swap_remove moved the former last cluster into `drop`
        if drop < self.clusters.len() {
            for &q in &self.clusters[drop].qubit_ids {
                self.owner[q] = drop;
            }
        }
        let kept = std::mem::replace(
            &mut self.clusters[keep],
            Cluster {
                qubit_ids: Vec::new(),
                amplitudes: Vec::new(),
            },
        );
        let merged = if keep == a {
            kept.merge(removed)
        } else {
            removed.merge(kept)
        };
        for &q in &merged.qubit_ids {
            self.owner[q] = keep;
        }
        self.clusters[keep] = merged;
    }

    /// Marginal probability that `qubit` measures `outcome`.
    pub fn probability_of(&self, qubit: usize, outcome: bool) -> Result<f64> {
        self.check(qubit)?;
        let cluster = &self.clusters[self.owner[qubit]];
        let mask = 1usize << cluster.position(qubit);
        let p: f64 = cluster
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & mask != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }

    /// Largest deviation of any cluster's squared norm from one.
    pub fn norm_error(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| (c.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Sample every cluster once, collapse the register to the sampled basis
    /// state and return the bits indexed by qubit id.
    ///
    /// Clusters are sampled in order of their smallest qubit id with one
    /// uniform draw each, so the outcome depends only on the rng state.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<bool> {
        let mut order: Vec<usize> = (0..self.clusters.len()).collect();
        order.sort_by_key(|&c| self.clusters[c].qubit_ids.iter().copied().min());

        let mut bits = vec![false; self.num_qubits];
        for c in order {
            let cluster = &self.clusters[c];
            let u: f64 = rng.gen();
            let outcome = sample_index(&cluster.amplitudes, u);
            for (k, &q) in cluster.qubit_ids.iter().enumerate() {
                bits[q] = outcome >> k & 1 == 1;
            }
        }
        *self = QuantumRegister::from_bits(&bits).expect("non-empty register");
        bits
    }
}

/// Inverse-CDF sampling over |amplitude|². Falls back to the last index with
/// non-zero weight when rounding leaves `u` above the cumulative total.
fn sample_index(amplitudes: &[Complex64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, a) in amplitudes.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            last_nonzero = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_nonzero
}
