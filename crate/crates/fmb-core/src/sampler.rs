//! Circuit distributions P_v: randomized mirror circuits and fixed-density
//! random Clifford circuits.
//!
//! Mirror circuits follow the benchmark-depth convention: a depth-d mirror
//! circuit consists of d/4 sampled layers, their reversed inverses, a random
//! Pauli layer between (and around) all d/2 main layers, and a cap layer of
//! uniformly random single-qubit Cliffords with its inverse at the end. The
//! physical layer count is d + 3.
//!
//! Fixed-density circuits contain exactly round(w*d*xi/2) two-qubit gates at
//! uniformly random non-conflicting slots, so the two-qubit density is a true
//! circuit feature rather than a sampling parameter.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::circuit::{invert_layer, Circuit, ConnectivityGraph, Gate, Layer};
use crate::clifford::Cliff1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("benchmark depth {0} must be a positive multiple of 4")]
    BadBenchmarkDepth(usize),
    #[error("width {w} unsupported: need 2 <= w <= {max}")]
    WidthUnsupported { w: usize, max: usize },
    #[error("two-qubit density {0} outside [0, 1]")]
    BadDensity(f64),
    #[error("no connected pairs available for a nonzero two-qubit density")]
    NoEdges,
    #[error("cannot place {required} two-qubit gates in {layers} layers of width {width}")]
    DensityInfeasible {
        required: usize,
        layers: usize,
        width: usize,
    },
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
}

/// How the benchmarked qubit subset is chosen for a given width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QubitChoice {
    /// The first w vertices of the connectivity graph, in label order.
    FirstW,
    /// An explicit qubit set; widths must match its size.
    Explicit(Vec<usize>),
}

impl QubitChoice {
    fn select(
        &self,
        connectivity: &ConnectivityGraph,
        w: usize,
    ) -> Result<Vec<usize>, SamplerError> {
        let max = connectivity.vertices().len();
        match self {
            QubitChoice::FirstW => {
                if w < 2 || w > max {
                    return Err(SamplerError::WidthUnsupported { w, max });
                }
                Ok(connectivity.vertices()[..w].to_vec())
            }
            QubitChoice::Explicit(set) => {
                if set.len() != w || w < 2 {
                    return Err(SamplerError::WidthUnsupported { w, max });
                }
                let mut q = set.clone();
                q.sort_unstable();
                for &qubit in &q {
                    if connectivity.vertices().binary_search(&qubit).is_err() {
                        return Err(SamplerError::WidthUnsupported { w, max });
                    }
                }
                Ok(q)
            }
        }
    }
}

/// Configuration of the randomized-mirror-circuit distribution.
#[derive(Debug, Clone)]
pub struct MirrorSamplerConfig {
    pub connectivity: ConnectivityGraph,
    pub qubit_choice: QubitChoice,
    /// Target mean two-qubit density (a pseudo-feature), used when the
    /// feature vector does not carry its own density component.
    pub xi: f64,
}

/// Configuration of the fixed-density Clifford-circuit distribution.
#[derive(Debug, Clone)]
pub struct FixedDensitySamplerConfig {
    pub connectivity: ConnectivityGraph,
    pub qubit_choice: QubitChoice,
}

fn random_cliff(rng: &mut ChaCha12Rng) -> Cliff1 {
    Cliff1::new(rng.random_range(0..Cliff1::COUNT)).expect("index in range")
}

fn random_pauli_gate(rng: &mut ChaCha12Rng) -> Cliff1 {
    Cliff1::PAULIS[rng.random_range(0..4)]
}

fn uniform_cliff_layer(qubits: &[usize], rng: &mut ChaCha12Rng) -> Layer {
    let gates = qubits
        .iter()
        .map(|&q| Gate::Cliff {
            c: random_cliff(rng),
            q,
        })
        .collect();
    Layer::new(gates).expect("one gate per qubit")
}

fn random_pauli_layer(qubits: &[usize], rng: &mut ChaCha12Rng) -> Layer {
    let gates = qubits
        .iter()
        .map(|&q| Gate::Cliff {
            c: random_pauli_gate(rng),
            q,
        })
        .collect();
    Layer::new(gates).expect("one gate per qubit")
}

/// Uniformly random maximal matching of the induced subgraph: a random edge
/// scan, greedily keeping disjoint edges.
fn random_maximal_matching(
    edges: &[(usize, usize)],
    rng: &mut ChaCha12Rng,
) -> Vec<(usize, usize)> {
    let mut order: Vec<(usize, usize)> = edges.to_vec();
    order.shuffle(rng);
    let mut used = alloc::collections::BTreeSet::new();
    let mut matching = Vec::new();
    for (a, b) in order {
        if !used.contains(&a) && !used.contains(&b) {
            used.insert(a);
            used.insert(b);
            matching.push((a, b));
        }
    }
    matching
}

/// Samples one layer with the edgegrab rule: build a random maximal matching
/// M of the connectivity subgraph on Q, include each matched edge as a CX
/// independently with probability p = min(1, w*xi/|M|), and fill every other
/// qubit with an independent uniformly random single-qubit Clifford. The
/// expected per-layer two-qubit-gate count is w*xi whenever p <= 1.
pub fn sample_edgegrab_layer(
    qubits: &[usize],
    connectivity: &ConnectivityGraph,
    xi: f64,
    rng: &mut ChaCha12Rng,
) -> Result<Layer, SamplerError> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(SamplerError::BadDensity(xi));
    }
    let w = qubits.len();
    let mut gates = Vec::with_capacity(w);
    let mut in_cx = alloc::collections::BTreeSet::new();
    if xi > 0.0 {
        let edges = connectivity.edges_within(qubits);
        if edges.is_empty() {
            return Err(SamplerError::NoEdges);
        }
        let matching = random_maximal_matching(&edges, rng);
        let p = (w as f64 * xi / matching.len() as f64).min(1.0);
        for (a, b) in matching {
            if rng.random::<f64>() < p {
                let (control, target) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
                gates.push(Gate::Cx { control, target });
                in_cx.insert(a);
                in_cx.insert(b);
            }
        }
    }
    for &q in qubits {
        if !in_cx.contains(&q) {
            gates.push(Gate::Cliff {
                c: random_cliff(rng),
                q,
            });
        }
    }
    Ok(Layer::new(gates)?)
}

/// Samples a randomized mirror circuit of benchmark depth d: cap layer,
/// alternating random-Pauli and main layers (the last d/4 main layers being
/// the reversed inverses of the first d/4), a final Pauli layer, and the
/// inverse cap. Noiseless execution has a definite outcome.
pub fn sample_mirror_circuit(
    w: usize,
    d: usize,
    xi: f64,
    config: &MirrorSamplerConfig,
    rng: &mut ChaCha12Rng,
) -> Result<Circuit, SamplerError> {
    if d == 0 || d % 4 != 0 {
        return Err(SamplerError::BadBenchmarkDepth(d));
    }
    let qubits = config.qubit_choice.select(&config.connectivity, w)?;

    let cap = uniform_cliff_layer(&qubits, rng);
    let half: Result<Vec<Layer>, SamplerError> = (0..d / 4)
        .map(|_| sample_edgegrab_layer(&qubits, &config.connectivity, xi, rng))
        .collect();
    let half = half?;
    let mut main = half.clone();
    main.extend(half.iter().rev().map(invert_layer));

    let mut layers = Vec::with_capacity(d + 3);
    layers.push(cap.clone());
    for m in main {
        layers.push(random_pauli_layer(&qubits, rng));
        layers.push(m);
    }
    layers.push(random_pauli_layer(&qubits, rng));
    layers.push(invert_layer(&cap));
    Ok(Circuit::new(qubits, layers)?)
}

/// Samples a fixed-density random Clifford circuit: exactly
/// round(w*d*xi/2) CX gates at uniformly random non-conflicting
/// (layer, connected-pair) slots, all other slots filled with uniformly
/// random single-qubit Cliffords.
pub fn sample_fixed_density_circuit(
    w: usize,
    d: usize,
    xi: f64,
    config: &FixedDensitySamplerConfig,
    rng: &mut ChaCha12Rng,
) -> Result<Circuit, SamplerError> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(SamplerError::BadDensity(xi));
    }
    if d == 0 {
        return Err(SamplerError::BadBenchmarkDepth(d));
    }
    let qubits = config.qubit_choice.select(&config.connectivity, w)?;
    let n2q = libm::floor(w as f64 * d as f64 * xi / 2.0 + 0.5) as usize;
    let infeasible = SamplerError::DensityInfeasible {
        required: n2q,
        layers: d,
        width: w,
    };
    if n2q > d * (w / 2) {
        return Err(infeasible);
    }

    let mut placed: Vec<Vec<Gate>> = vec![Vec::new(); d];
    if n2q > 0 {
        let edges = config.connectivity.edges_within(&qubits);
        if edges.is_empty() {
            return Err(SamplerError::NoEdges);
        }
        let mut slots: Vec<(usize, usize)> = Vec::with_capacity(d * edges.len());
        for layer in 0..d {
            for e in 0..edges.len() {
                slots.push((layer, e));
            }
        }
        // rejection-free sequential placement, retried with a fresh shuffle
        // if the greedy pass conflicts itself out of capacity
        const MAX_RETRIES: usize = 20;
        let mut done = false;
        for _ in 0..MAX_RETRIES {
            slots.shuffle(rng);
            let mut used: Vec<alloc::collections::BTreeSet<usize>> =
                vec![alloc::collections::BTreeSet::new(); d];
            let mut accepted: Vec<(usize, usize)> = Vec::with_capacity(n2q);
            for &(layer, e) in slots.iter() {
                if accepted.len() == n2q {
                    break;
                }
                let (a, b) = edges[e];
                if !used[layer].contains(&a) && !used[layer].contains(&b) {
                    used[layer].insert(a);
                    used[layer].insert(b);
                    accepted.push((layer, e));
                }
            }
            if accepted.len() == n2q {
                for (layer, e) in accepted {
                    let (a, b) = edges[e];
                    let (control, target) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
                    placed[layer].push(Gate::Cx { control, target });
                }
                done = true;
                break;
            }
        }
        if !done {
            return Err(infeasible);
        }
    }

    let mut layers = Vec::with_capacity(d);
    for gates_2q in placed {
        let mut busy = alloc::collections::BTreeSet::new();
        for g in &gates_2q {
            for q in g.qubits() {
                busy.insert(q);
            }
        }
        let mut gates = gates_2q;
        for &q in &qubits {
            if !busy.contains(&q) {
                gates.push(Gate::Cliff {
                    c: random_cliff(rng),
                    q,
                });
            }
        }
        layers.push(Layer::new(gates)?);
    }
    Ok(Circuit::new(qubits, layers)?)
}

/// Two-qubit density under the benchmark-depth convention, i.e. with the
/// denominator w*d instead of the physical layer count.
pub fn benchmark_xi2q(circuit: &Circuit, benchmark_depth: usize) -> f64 {
    let n2q: usize = circuit
        .layers()
        .iter()
        .flat_map(|l| l.gates())
        .filter(|g| matches!(g, Gate::Cx { .. }))
        .count();
    2.0 * n2q as f64 / (circuit.width() * benchmark_depth) as f64
}
