//! Stochastic Pauli + readout-confusion noise model.
//!
//! Each non-identity gate is followed, with its per-gate error probability,
//! by a uniformly random non-identity Pauli on the gate's support (uniform
//! over 3 for single-qubit gates, over 15 for two-qubit gates). At
//! measurement each bit flips according to its readout confusion.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::ConnectivityGraph;
use crate::sim::SimError;

/// Per-qubit readout confusion probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReadoutConfusion {
    /// Pr(prepared 1, measured 0).
    pub p10: f64,
    /// Pr(prepared 0, measured 1).
    pub p01: f64,
}

/// Noise rates keyed by qubit label / qubit-label pair.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    e1: BTreeMap<usize, f64>,
    e2: BTreeMap<(usize, usize), f64>,
    readout: BTreeMap<usize, ReadoutConfusion>,
}

impl NoiseModel {
    pub fn new() -> NoiseModel {
        NoiseModel::default()
    }

    /// All-zero rates on the given qubits (a noiseless device description).
    pub fn noiseless(qubits: &[usize], connectivity: &ConnectivityGraph) -> NoiseModel {
        let mut m = NoiseModel::new();
        for &q in qubits {
            m.e1.insert(q, 0.0);
            m.readout.insert(q, ReadoutConfusion::default());
        }
        for &(a, b) in connectivity.edges() {
            m.e2.insert((a.min(b), a.max(b)), 0.0);
        }
        m
    }

    /// Uniform rates over a qubit set with all-to-all pairs.
    pub fn uniform(qubits: &[usize], e1: f64, e2: f64, readout: ReadoutConfusion) -> NoiseModel {
        let mut m = NoiseModel::new();
        for &q in qubits {
            m.e1.insert(q, e1);
            m.readout.insert(q, readout);
        }
        for (i, &a) in qubits.iter().enumerate() {
            for &b in &qubits[i + 1..] {
                m.e2.insert((a.min(b), a.max(b)), e2);
            }
        }
        m
    }

    pub fn set_e1(&mut self, qubit: usize, rate: f64) -> &mut Self {
        debug_assert!((0.0..=1.0).contains(&rate));
        self.e1.insert(qubit, rate);
        self
    }

    pub fn set_e2(&mut self, a: usize, b: usize, rate: f64) -> &mut Self {
        debug_assert!((0.0..=1.0).contains(&rate));
        self.e2.insert((a.min(b), a.max(b)), rate);
        self
    }

    pub fn set_readout(&mut self, qubit: usize, confusion: ReadoutConfusion) -> &mut Self {
        self.readout.insert(qubit, confusion);
        self
    }

    pub fn e1(&self, qubit: usize) -> Result<f64, SimError> {
        self.e1
            .get(&qubit)
            .copied()
            .ok_or_else(|| SimError::IncompleteNoiseModel(format!("1Q rate for qubit {}", qubit)))
    }

    pub fn e2(&self, a: usize, b: usize) -> Result<f64, SimError> {
        self.e2.get(&(a.min(b), a.max(b))).copied().ok_or_else(|| {
            SimError::IncompleteNoiseModel(format!("2Q rate for pair ({}, {})", a, b))
        })
    }

    pub fn readout(&self, qubit: usize) -> Result<ReadoutConfusion, SimError> {
        self.readout.get(&qubit).copied().ok_or_else(|| {
            SimError::IncompleteNoiseModel(format!("readout confusion for qubit {}", qubit))
        })
    }

    pub fn qubits(&self) -> Vec<usize> {
        self.e1.keys().copied().collect()
    }

    /// Connectivity graph implied by the tabulated two-qubit rates.
    pub fn connectivity(&self) -> ConnectivityGraph {
        let mut vertices: Vec<usize> = self.e1.keys().copied().collect();
        for &(a, b) in self.e2.keys() {
            vertices.push(a);
            vertices.push(b);
        }
        vertices.sort_unstable();
        vertices.dedup();
        // reject defective pairs (100% error entries mark unusable edges)
        let edges = self
            .e2
            .iter()
            .filter(|&(_, &rate)| rate < 1.0)
            .map(|(&pair, _)| pair)
            .collect();
        ConnectivityGraph::new(vertices, edges).expect("rates imply a valid graph")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn missing_rates_are_reported() {
        let m = NoiseModel::new();
        assert!(matches!(m.e1(0), Err(SimError::IncompleteNoiseModel(_))));
        assert!(matches!(m.e2(0, 1), Err(SimError::IncompleteNoiseModel(_))));
        assert!(matches!(
            m.readout(3),
            Err(SimError::IncompleteNoiseModel(_))
        ));
    }

    #[test]
    fn pair_lookup_is_order_insensitive() {
        let mut m = NoiseModel::new();
        m.set_e2(3, 1, 0.25);
        assert_eq!(m.e2(1, 3).unwrap(), 0.25);
        assert_eq!(m.e2(3, 1).unwrap(), 0.25);
    }

    #[test]
    fn connectivity_excludes_defective_pairs() {
        let mut m = NoiseModel::new();
        m.set_e1(0, 0.0).set_e1(1, 0.0).set_e1(2, 0.0);
        m.set_e2(0, 1, 0.01);
        m.set_e2(1, 2, 1.0); // dead edge
        let g = m.connectivity();
        assert_eq!(g.vertices(), &[0, 1, 2]);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn uniform_covers_all_pairs() {
        let m = NoiseModel::uniform(&[0, 1, 2], 0.001, 0.01, ReadoutConfusion::default());
        assert_eq!(m.e2(0, 2).unwrap(), 0.01);
        assert_eq!(m.connectivity().edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(m.qubits(), vec![0, 1, 2]);
    }
}
