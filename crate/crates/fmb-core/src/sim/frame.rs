//! Noisy shot sampling via bit-packed Pauli frames.
//!
//! One ideal tableau pass produces a reference sample; the per-shot work is
//! then a Pauli frame (an error word per qubit) propagated through the
//! circuit, with stochastic Pauli errors injected after faulty gates and
//! readout confusion applied at the end. Frames for 64 shots are packed into
//! each machine word. The initial Z-frame is randomized, which converts the
//! fixed reference sample into exact sampling of the circuit's outcome
//! distribution.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::circuit::{Circuit, Gate};
use crate::sim::backend::Counts;
use crate::sim::noise::NoiseModel;
use crate::sim::tableau::Tableau;
use crate::sim::SimError;

struct FrameSet {
    words: usize,
    shots: u64,
    /// per qubit position: packed x / z frame bits across shots
    x: Vec<Vec<u64>>,
    z: Vec<Vec<u64>>,
}

impl FrameSet {
    fn new(width: usize, shots: u64, rng: &mut ChaCha12Rng) -> FrameSet {
        let words = ((shots + 63) / 64) as usize;
        let x = vec![vec![0u64; words]; width];
        let mut z = Vec::with_capacity(width);
        for _ in 0..width {
            // randomize the initial Z frame: |0..0> is stabilized by every
            // Z string, and propagating a random one randomizes exactly the
            // non-deterministic measurement bits
            let mut col = vec![0u64; words];
            for w in col.iter_mut() {
                *w = rng.random::<u64>();
            }
            z.push(col);
        }
        let mut f = FrameSet { words, shots, x, z };
        f.mask_tail();
        f
    }

    fn mask_tail(&mut self) {
        let tail = (self.shots % 64) as u32;
        if tail != 0 {
            let mask = (1u64 << tail) - 1;
            for col in self.x.iter_mut().chain(self.z.iter_mut()) {
                col[self.words - 1] &= mask;
            }
        }
    }

    fn apply_cliff_map(&mut self, q: usize, px: (bool, bool), pz: (bool, bool)) {
        // frame (x, z) bits map through the gate's symplectic action:
        // X -> px, Z -> pz (bit pairs are (x-part, z-part))
        for i in 0..self.words {
            let xw = self.x[q][i];
            let zw = self.z[q][i];
            let nx = if px.0 { xw } else { 0 } ^ if pz.0 { zw } else { 0 };
            let nz = if px.1 { xw } else { 0 } ^ if pz.1 { zw } else { 0 };
            self.x[q][i] = nx;
            self.z[q][i] = nz;
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        for i in 0..self.words {
            self.x[target][i] ^= self.x[control][i];
            self.z[control][i] ^= self.z[target][i];
        }
    }

    fn flip(&mut self, col: Col, q: usize, shot: u64) {
        let w = (shot / 64) as usize;
        let b = shot % 64;
        match col {
            Col::X => self.x[q][w] ^= 1 << b,
            Col::Z => self.z[q][w] ^= 1 << b,
        }
    }
}

enum Col {
    X,
    Z,
}

/// Visits each shot independently with probability `p`, via geometric gaps.
fn for_erring_shots(
    p: f64,
    shots: u64,
    rng: &mut ChaCha12Rng,
    mut visit: impl FnMut(u64, &mut ChaCha12Rng),
) {
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for s in 0..shots {
            visit(s, rng);
        }
        return;
    }
    let log_q = libm::log1p(-p);
    let mut pos: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let skip = libm::floor(libm::log1p(-u) / log_q) as u64;
        pos = pos.saturating_add(skip);
        if pos >= shots {
            return;
        }
        visit(pos, rng);
        pos += 1;
    }
}

/// Samples `shots` outcomes of the circuit under the noise model (or
/// noiselessly when `noise` is `None`). Outcomes are keyed by the packed bit
/// mask over circuit qubit positions; counts always sum to `shots`.
pub fn sample_shots(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    shots: u64,
    rng: &mut ChaCha12Rng,
) -> Result<Counts, SimError> {
    let width = circuit.width();
    if width > 64 {
        return Err(SimError::WidthTooLarge(width));
    }
    if shots == 0 {
        return Err(SimError::NoShots);
    }

    // ideal pass: reference sample (random measurement outcomes pinned)
    let mut tableau = Tableau::new(width)?;
    tableau.apply_circuit(circuit)?;
    let reference = tableau.measure_all_reference();

    let mut frames = FrameSet::new(width, shots, rng);

    for layer in circuit.layers() {
        for gate in layer.gates() {
            match *gate {
                Gate::Cliff { c, q } => {
                    if c.is_identity() {
                        continue;
                    }
                    let pos = circuit
                        .position(q)
                        .ok_or(SimError::QubitOutOfRange(q, width))?;
                    let px = c.conjugate(crate::clifford::Pauli1::X).0.bits();
                    let pz = c.conjugate(crate::clifford::Pauli1::Z).0.bits();
                    frames.apply_cliff_map(pos, px, pz);
                    if let Some(noise) = noise {
                        let e = noise.e1(q)?;
                        for_erring_shots(e, shots, rng, |shot, rng| {
                            let k: u8 = rng.random_range(1..4);
                            if k & 1 == 1 {
                                frames.flip(Col::X, pos, shot);
                            }
                            if k & 2 == 2 {
                                frames.flip(Col::Z, pos, shot);
                            }
                        });
                    }
                }
                Gate::Cx { control, target } => {
                    let pc = circuit
                        .position(control)
                        .ok_or(SimError::QubitOutOfRange(control, width))?;
                    let pt = circuit
                        .position(target)
                        .ok_or(SimError::QubitOutOfRange(target, width))?;
                    frames.apply_cx(pc, pt);
                    if let Some(noise) = noise {
                        let e = noise.e2(control, target)?;
                        for_erring_shots(e, shots, rng, |shot, rng| {
                            let k: u8 = rng.random_range(1..16);
                            if k & 1 == 1 {
                                frames.flip(Col::X, pc, shot);
                            }
                            if k & 2 == 2 {
                                frames.flip(Col::Z, pc, shot);
                            }
                            if k & 4 == 4 {
                                frames.flip(Col::X, pt, shot);
                            }
                            if k & 8 == 8 {
                                frames.flip(Col::Z, pt, shot);
                            }
                        });
                    }
                }
            }
        }
    }

    // readout: pre-measurement bits, then confusion flips
    let words = frames.words;
    let mut out_cols: Vec<Vec<u64>> = Vec::with_capacity(width);
    for (pos, &label) in circuit.qubits().iter().enumerate() {
        let ref_bit = (reference >> pos) & 1 == 1;
        let mut pre = frames.x[pos].clone();
        if ref_bit {
            for w in pre.iter_mut() {
                *w = !*w;
            }
        }
        if let Some(noise) = noise {
            let confusion = noise.readout(label)?;
            let mut flips1 = vec![0u64; words];
            let mut flips0 = vec![0u64; words];
            for_erring_shots(confusion.p10, shots, rng, |shot, _| {
                flips1[(shot / 64) as usize] ^= 1 << (shot % 64);
            });
            for_erring_shots(confusion.p01, shots, rng, |shot, _| {
                flips0[(shot / 64) as usize] ^= 1 << (shot % 64);
            });
            for w in 0..words {
                pre[w] ^= (flips1[w] & pre[w]) | (flips0[w] & !pre[w]);
            }
        }
        out_cols.push(pre);
    }

    let mut counts = Counts::new(width);
    for shot in 0..shots {
        let w = (shot / 64) as usize;
        let b = shot % 64;
        let mut key = 0u64;
        for (pos, col) in out_cols.iter().enumerate() {
            key |= ((col[w] >> b) & 1) << pos;
        }
        counts.add(key, 1);
    }
    Ok(counts)
}

/// Noisy execution per the stochastic Pauli + readout-confusion model.
pub fn simulate_noisy_shots(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    rng: &mut ChaCha12Rng,
) -> Result<Counts, SimError> {
    sample_shots(circuit, Some(noise), shots, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Layer;
    use crate::clifford::Cliff1;
    use crate::sim::noise::ReadoutConfusion;
    use crate::sim::tableau::simulate_ideal_output;
    use crate::stream;

    fn x_chain(n_gates: usize) -> Circuit {
        let layers = (0..n_gates)
            .map(|_| {
                Layer::new(vec![Gate::Cliff {
                    c: Cliff1::X,
                    q: 0,
                }])
                .unwrap()
            })
            .collect();
        Circuit::new(vec![0], layers).unwrap()
    }

    #[test]
    fn zero_rates_concentrate_on_ideal_output() {
        let c = x_chain(3); // odd number of X gates: output 1
        let x_c = simulate_ideal_output(&c).unwrap();
        assert_eq!(x_c, 1);
        let noise = NoiseModel::uniform(&[0], 0.0, 0.0, ReadoutConfusion::default());
        let mut rng = stream::derive(1, &[]);
        let counts = simulate_noisy_shots(&c, &noise, 1000, &mut rng).unwrap();
        assert_eq!(counts.total(), 1000);
        assert_eq!(counts.get(x_c), 1000);
    }

    #[test]
    fn certain_readout_flip() {
        // Pr(prep 0, measure 1) = 1 on a qubit that ideally reads 0
        let c = x_chain(2);
        assert_eq!(simulate_ideal_output(&c).unwrap(), 0);
        let mut noise = NoiseModel::uniform(&[0], 0.0, 0.0, ReadoutConfusion::default());
        noise.set_readout(
            0,
            ReadoutConfusion {
                p10: 0.0,
                p01: 1.0,
            },
        );
        let mut rng = stream::derive(2, &[]);
        let counts = simulate_noisy_shots(&c, &noise, 512, &mut rng).unwrap();
        assert_eq!(counts.get(1), 512);
    }

    #[test]
    fn histogram_sums_to_shots_and_is_reproducible() {
        let mut layers = Vec::new();
        layers.push(
            Layer::new(vec![
                Gate::Cliff {
                    c: Cliff1::H,
                    q: 0,
                },
                Gate::Cliff {
                    c: Cliff1::IDENTITY,
                    q: 1,
                },
            ])
            .unwrap(),
        );
        layers.push(
            Layer::new(vec![Gate::Cx {
                control: 0,
                target: 1,
            }])
            .unwrap(),
        );
        let c = Circuit::new(vec![0, 1], layers).unwrap();
        let noise = NoiseModel::uniform(
            &[0, 1],
            0.01,
            0.02,
            ReadoutConfusion {
                p10: 0.01,
                p01: 0.03,
            },
        );
        let run = |seed: u64| {
            let mut rng = stream::derive(seed, &[4, 2]);
            simulate_noisy_shots(&c, &noise, 4096, &mut rng).unwrap()
        };
        let a = run(9);
        let b = run(9);
        assert_eq!(a, b);
        assert_eq!(a.total(), 4096);
        assert_ne!(a, run(10));
    }

    #[test]
    fn bell_circuit_outcomes_are_correlated_noiselessly() {
        let layers = vec![
            Layer::new(vec![
                Gate::Cliff {
                    c: Cliff1::H,
                    q: 0,
                },
                Gate::Cliff {
                    c: Cliff1::IDENTITY,
                    q: 1,
                },
            ])
            .unwrap(),
            Layer::new(vec![Gate::Cx {
                control: 0,
                target: 1,
            }])
            .unwrap(),
        ];
        let c = Circuit::new(vec![0, 1], layers).unwrap();
        let mut rng = stream::derive(3, &[]);
        let counts = sample_shots(&c, None, 2000, &mut rng).unwrap();
        let n00 = counts.get(0b00);
        let n11 = counts.get(0b11);
        assert_eq!(n00 + n11, 2000, "only correlated outcomes");
        // both halves populated (probability ~2^-2000 of failing)
        assert!(n00 > 0 && n11 > 0);
    }

    #[test]
    fn depolarizing_chain_matches_markov_oracle() {
        // 1-qubit circuit of 10 identity-composing X gates with e1 = 0.01.
        // Oracle: all operators preserve the computational-basis diagonal, so
        // the success probability follows a two-state Markov chain where each
        // gate flips the bit and each error event flips it with probability
        // 2/3 (X and Y flip, Z does not).
        let e = 0.01;
        let mut q = 0.0f64; // P(bit = 1)
        for _ in 0..10 {
            q = 1.0 - q; // X gate
            let flip = 2.0 / 3.0 * e;
            q = q * (1.0 - flip) + (1.0 - q) * flip;
        }
        let expected_success = 1.0 - q; // ideal output of 10 X gates is 0
        let c = x_chain(10);
        let noise = NoiseModel::uniform(&[0], e, 0.0, ReadoutConfusion::default());
        let shots = 100_000u64;
        let mut rng = stream::derive(7, &[1]);
        let counts = simulate_noisy_shots(&c, &noise, shots, &mut rng).unwrap();
        let observed = counts.get(0) as f64 / shots as f64;
        let sigma = libm::sqrt(expected_success * (1.0 - expected_success) / shots as f64);
        assert!(
            (observed - expected_success).abs() < 3.0 * sigma,
            "observed {} expected {} (3 sigma = {})",
            observed,
            expected_success,
            3.0 * sigma
        );
    }

    #[test]
    fn missing_rate_for_used_gate_is_an_error() {
        let c = x_chain(1);
        let noise = NoiseModel::new();
        let mut rng = stream::derive(1, &[]);
        assert!(matches!(
            simulate_noisy_shots(&c, &noise, 10, &mut rng),
            Err(SimError::IncompleteNoiseModel(_))
        ));
    }
}
