//! Clifford circuits: gates, layers, connectivity, and circuit features.
//!
//! A circuit is an ordered list of layers over a fixed, ascending qubit list.
//! Every qubit is acted on by exactly one gate per layer; idle qubits carry an
//! explicit `C0`, which keeps the width of each layer unambiguous and makes
//! the density denominators `w*d` exact.
//!
//! The text format is one layer per line:
//!
//! ```text
//! L0: C14 0; CX 1 2; C0 3
//! L1: C5 0; C12 1; C1 2; C7 3
//! ```

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::clifford::Cliff1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("qubit list must be non-empty and strictly ascending")]
    BadQubitList,
    #[error("qubit {0} appears in more than one gate of a layer")]
    OverlappingQubit(usize),
    #[error("qubit {0} is not covered by a gate in a layer")]
    UncoveredQubit(usize),
    #[error("gate references qubit {0} outside the circuit's qubit list")]
    UnknownQubit(usize),
    #[error("two-qubit gate with identical control and target {0}")]
    DegenerateGate(usize),
    #[error("circuit has no layers; densities are undefined")]
    DegenerateCircuit,
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A single gate: one of the 24 single-qubit Cliffords, or CX.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Cliff { c: Cliff1, q: usize },
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Gate::Cliff { q, .. } => (q, None),
            Gate::Cx { control, target } => (control, Some(target)),
        };
        core::iter::once(a).chain(b)
    }

    fn min_qubit(&self) -> usize {
        match *self {
            Gate::Cliff { q, .. } => q,
            Gate::Cx { control, target } => control.min(target),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(*self, Gate::Cliff { c, .. } if c.is_identity())
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Cliff { c, q } => Gate::Cliff { c: c.inverse(), q },
            g @ Gate::Cx { .. } => g, // CX is self-inverse
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Cliff { c, q } => write!(f, "C{} {}", c.index(), q),
            Gate::Cx { control, target } => write!(f, "CX {} {}", control, target),
        }
    }
}

/// One layer of gates. Gates are kept sorted by their smallest qubit so that
/// serialization is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    gates: Vec<Gate>,
}

impl Layer {
    /// Builds a layer, checking that no qubit is touched twice.
    pub fn new(mut gates: Vec<Gate>) -> Result<Layer, CircuitError> {
        let mut seen = BTreeSet::new();
        for g in &gates {
            if let Gate::Cx { control, target } = g {
                if control == target {
                    return Err(CircuitError::DegenerateGate(*control));
                }
            }
            for q in g.qubits() {
                if !seen.insert(q) {
                    return Err(CircuitError::OverlappingQubit(q));
                }
            }
        }
        gates.sort_by_key(Gate::min_qubit);
        Ok(Layer { gates })
    }

    /// Identity layer (explicit C0 on every qubit).
    pub fn identity(qubits: &[usize]) -> Layer {
        let gates = qubits
            .iter()
            .map(|&q| Gate::Cliff {
                c: Cliff1::IDENTITY,
                q,
            })
            .collect();
        Layer { gates }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Checks that the layer acts on exactly the given ascending qubit list.
    pub fn check_coverage(&self, qubits: &[usize]) -> Result<(), CircuitError> {
        let mut covered = BTreeSet::new();
        for g in &self.gates {
            for q in g.qubits() {
                if qubits.binary_search(&q).is_err() {
                    return Err(CircuitError::UnknownQubit(q));
                }
                covered.insert(q);
            }
        }
        for &q in qubits {
            if !covered.contains(&q) {
                return Err(CircuitError::UncoveredQubit(q));
            }
        }
        Ok(())
    }
}

/// Inverse of a layer: every gate replaced with its inverse. Composing a
/// layer with its inverse acts as the identity on every state.
pub fn invert_layer(layer: &Layer) -> Layer {
    Layer {
        gates: layer.gates.iter().map(Gate::inverse).collect(),
    }
}

/// A Clifford circuit: an ascending qubit list and an ordered list of layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    qubits: Vec<usize>,
    layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(qubits: Vec<usize>, layers: Vec<Layer>) -> Result<Circuit, CircuitError> {
        if qubits.is_empty() || qubits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CircuitError::BadQubitList);
        }
        for layer in &layers {
            layer.check_coverage(&qubits)?;
        }
        Ok(Circuit { qubits, layers })
    }

    /// A depth-0 circuit on the given qubits (the SR-DFE null reference).
    pub fn empty(qubits: Vec<usize>) -> Result<Circuit, CircuitError> {
        Circuit::new(qubits, Vec::new())
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Position of a qubit label within the circuit's qubit list.
    pub fn position(&self, qubit: usize) -> Option<usize> {
        self.qubits.binary_search(&qubit).ok()
    }

    pub fn push_layer(&mut self, layer: Layer) -> Result<(), CircuitError> {
        layer.check_coverage(&self.qubits)?;
        self.layers.push(layer);
        Ok(())
    }

    /// Serializes to the one-layer-per-line text format.
    pub fn to_text(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let _ = write!(out, "L{}:", k);
            for (i, gate) in layer.gates().iter().enumerate() {
                let sep = if i == 0 { " " } else { "; " };
                let _ = write!(out, "{}{}", sep, gate);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format. The qubit list is recovered from the gates;
    /// every layer must cover the same qubits and overlaps are rejected.
    pub fn parse(text: &str) -> Result<Circuit, CircuitError> {
        let mut layers = Vec::new();
        let mut qubits: Option<Vec<usize>> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let body = line
                .split_once(':')
                .filter(|(head, _)| head.starts_with('L'))
                .map(|(_, body)| body)
                .ok_or(CircuitError::Parse {
                    line: lineno,
                    reason: String::from("expected `L<k>: <gate>; ...`"),
                })?;
            let mut gates = Vec::new();
            for item in body.split(';') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                gates.push(parse_gate(item, lineno)?);
            }
            let layer = Layer::new(gates).map_err(|e| CircuitError::Parse {
                line: lineno,
                reason: alloc::format!("{}", e),
            })?;
            let layer_qubits: Vec<usize> = layer
                .gates()
                .iter()
                .flat_map(Gate::qubits)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            match &qubits {
                None => qubits = Some(layer_qubits),
                Some(q) if *q == layer_qubits => {}
                Some(_) => {
                    return Err(CircuitError::Parse {
                        line: lineno,
                        reason: String::from("layer qubit set differs from previous layers"),
                    })
                }
            }
            layers.push(layer);
        }
        let qubits = qubits.ok_or(CircuitError::Parse {
            line: 0,
            reason: String::from("no layers"),
        })?;
        Circuit::new(qubits, layers)
    }
}

fn parse_gate(item: &str, line: usize) -> Result<Gate, CircuitError> {
    let err = |reason: String| CircuitError::Parse { line, reason };
    let mut parts = item.split_whitespace();
    let name = parts.next().ok_or_else(|| err(String::from("empty gate")))?;
    let mut args = Vec::new();
    for p in parts {
        let v: usize = p
            .parse()
            .map_err(|_| err(alloc::format!("bad qubit index `{}`", p)))?;
        args.push(v);
    }
    if name == "CX" {
        if args.len() != 2 {
            return Err(err(String::from("CX takes two qubits")));
        }
        return Ok(Gate::Cx {
            control: args[0],
            target: args[1],
        });
    }
    let idx: u8 = name
        .strip_prefix('C')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(alloc::format!("unknown gate `{}`", name)))?;
    let c = Cliff1::new(idx).ok_or_else(|| err(alloc::format!("unknown gate `{}`", name)))?;
    if args.len() != 1 {
        return Err(err(alloc::format!("{} takes one qubit", name)));
    }
    Ok(Gate::Cliff { c, q: args[0] })
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Undirected connectivity graph restricting where CX may be applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityGraph {
    vertices: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl ConnectivityGraph {
    pub fn new(
        vertices: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Result<ConnectivityGraph, CircuitError> {
        let mut vertices = vertices;
        vertices.sort_unstable();
        vertices.dedup();
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(CircuitError::DegenerateGate(a));
            }
            for q in [a, b] {
                if vertices.binary_search(&q).is_err() {
                    return Err(CircuitError::UnknownQubit(q));
                }
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(ConnectivityGraph {
            vertices,
            edges: canon,
        })
    }

    /// Path graph 0-1-2-...-(n-1).
    pub fn line(n: usize) -> ConnectivityGraph {
        let vertices = (0..n).collect();
        let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        ConnectivityGraph { vertices, edges }
    }

    /// Complete graph on n qubits.
    pub fn all_to_all(n: usize) -> ConnectivityGraph {
        let vertices: Vec<usize> = (0..n).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        ConnectivityGraph { vertices, edges }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges of the induced subgraph on the given qubit subset.
    pub fn edges_within(&self, qubits: &[usize]) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(a, b)| {
                qubits.binary_search(&a).is_ok() && qubits.binary_search(&b).is_ok()
            })
            .collect()
    }
}

/// The circuit features of §-style gate accounting: width, depth, gate
/// counts, densities, and the per-qubit activity vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureValues {
    pub w: usize,
    pub d: usize,
    pub n2q: usize,
    pub xi2q: f64,
    pub n1q: usize,
    pub xi1q: f64,
    pub active: Vec<bool>,
}

/// Computes exact feature values for a circuit. Single-qubit counts include
/// only non-identity gates; idles are padding, not operations.
pub fn compute_features(
    circuit: &Circuit,
    system_qubits: &[usize],
) -> Result<FeatureValues, CircuitError> {
    let w = circuit.width();
    let d = circuit.depth();
    if d == 0 {
        return Err(CircuitError::DegenerateCircuit);
    }
    let mut n2q = 0usize;
    let mut n1q = 0usize;
    for layer in circuit.layers() {
        for gate in layer.gates() {
            match gate {
                Gate::Cx { .. } => n2q += 1,
                Gate::Cliff { c, .. } if !c.is_identity() => n1q += 1,
                Gate::Cliff { .. } => {}
            }
        }
    }
    let wd = (w * d) as f64;
    let active = system_qubits
        .iter()
        .map(|q| circuit.position(*q).is_some())
        .collect();
    Ok(FeatureValues {
        w,
        d,
        n2q,
        xi2q: 2.0 * n2q as f64 / wd,
        n1q,
        xi1q: n1q as f64 / wd,
        active,
    })
}
