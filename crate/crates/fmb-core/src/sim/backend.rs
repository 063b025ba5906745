//! Execution backends: shot-count producers behind a common interface.
//!
//! Built-ins are the noiseless simulator and the noisy simulator
//! parameterized by a [`NoiseModel`]. A file-replay backend (serving stored
//! device counts) lives in the companion IO crate, behind this same trait.

use alloc::collections::BTreeMap;
use alloc::string::String;

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::sim::frame::sample_shots;
use crate::sim::noise::NoiseModel;
use crate::sim::SimError;

/// A histogram of measurement outcomes. Outcomes are bit masks over circuit
/// qubit positions, least significant bit = position 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    width: usize,
    map: BTreeMap<u64, u64>,
}

impl Counts {
    pub fn new(width: usize) -> Counts {
        Counts {
            width,
            map: BTreeMap::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn add(&mut self, outcome: u64, count: u64) {
        *self.map.entry(outcome).or_insert(0) += count;
    }

    pub fn get(&self, outcome: u64) -> u64 {
        self.map.get(&outcome).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.map.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }

    /// Renders an outcome with qubit position 0 as the leftmost character.
    pub fn render_bitstring(&self, outcome: u64) -> String {
        (0..self.width)
            .map(|q| if (outcome >> q) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Parses a bit string in the same convention.
    pub fn parse_bitstring(s: &str) -> Option<u64> {
        if s.len() > 64 {
            return None;
        }
        let mut out = 0u64;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => out |= 1 << i,
                _ => return None,
            }
        }
        Some(out)
    }
}

/// Identifies one executed circuit within a benchmark, so that backends that
/// serve stored data can look results up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct JobKey {
    pub vector: usize,
    pub circuit: usize,
}

/// A circuit executor: takes a circuit and a derived RNG stream, returns
/// outcome counts summing to `shots`.
pub trait Backend: Sync {
    fn execute(
        &self,
        key: JobKey,
        circuit: &Circuit,
        shots: u64,
        rng: &mut ChaCha12Rng,
    ) -> Result<Counts, SimError>;
}

/// Ideal execution: exact sampling of the noiseless outcome distribution.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoiselessBackend;

impl Backend for NoiselessBackend {
    fn execute(
        &self,
        _key: JobKey,
        circuit: &Circuit,
        shots: u64,
        rng: &mut ChaCha12Rng,
    ) -> Result<Counts, SimError> {
        sample_shots(circuit, None, shots, rng)
    }
}

/// Stochastic-Pauli noisy execution.
#[derive(Debug, Clone)]
pub struct NoisyBackend {
    pub noise: NoiseModel,
}

impl NoisyBackend {
    pub fn new(noise: NoiseModel) -> NoisyBackend {
        NoisyBackend { noise }
    }
}

impl Backend for NoisyBackend {
    fn execute(
        &self,
        _key: JobKey,
        circuit: &Circuit,
        shots: u64,
        rng: &mut ChaCha12Rng,
    ) -> Result<Counts, SimError> {
        sample_shots(circuit, Some(&self.noise), shots, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_rendering_round_trips() {
        let c = Counts::new(4);
        assert_eq!(c.render_bitstring(0b0110), "0110");
        assert_eq!(Counts::parse_bitstring("0110"), Some(0b0110));
        assert_eq!(Counts::parse_bitstring("01x0"), None);
    }

    #[test]
    fn totals_accumulate() {
        let mut c = Counts::new(2);
        c.add(0, 5);
        c.add(3, 7);
        c.add(0, 1);
        assert_eq!(c.total(), 13);
        assert_eq!(c.get(0), 6);
        assert_eq!(c.get(2), 0);
    }
}
