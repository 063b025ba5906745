//! Independent brute-force reference implementations used by the test
//! suites: a dense statevector simulator and a Pauli-transfer-matrix process
//! fidelity calculator. Nothing here shares code with the tableau or frame
//! simulators; gates are built from their {H, S} generating words as dense
//! 2x2 unitaries.
//!
//! Only practical for a handful of qubits.

use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::{Circuit, Gate};
use crate::clifford::{Cliff1, WORDS};
use crate::sim::NoiseModel;

/// Bare-bones complex number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

impl C {
    pub const ZERO: C = C { re: 0.0, im: 0.0 };
    pub const ONE: C = C { re: 1.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> C {
        C { re, im }
    }

    pub fn mul(self, o: C) -> C {
        C {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    pub fn add(self, o: C) -> C {
        C {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    pub fn conj(self) -> C {
        C {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

type U2 = [[C; 2]; 2];

fn mat_h() -> U2 {
    let s = 1.0 / libm::sqrt(2.0);
    [
        [C::new(s, 0.0), C::new(s, 0.0)],
        [C::new(s, 0.0), C::new(-s, 0.0)],
    ]
}

fn mat_s() -> U2 {
    [
        [C::ONE, C::ZERO],
        [C::ZERO, C::new(0.0, 1.0)],
    ]
}

fn mul2(a: U2, b: U2) -> U2 {
    let mut out = [[C::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = C::ZERO;
            for k in 0..2 {
                acc = acc.add(a[i][k].mul(b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Dense 2x2 unitary of a single-qubit Clifford, rebuilt from its
/// generating word (gates applied left to right in circuit order).
pub fn cliff_unitary(c: Cliff1) -> U2 {
    let mut u = [[C::ONE, C::ZERO], [C::ZERO, C::ONE]];
    for ch in WORDS[c.index() as usize].chars() {
        let g = if ch == 'H' { mat_h() } else { mat_s() };
        u = mul2(g, u);
    }
    u
}

/// Dense statevector over up to a handful of qubits; qubit q lives at bit q
/// of the amplitude index.
#[derive(Debug, Clone)]
pub struct DenseState {
    n: usize,
    pub amps: Vec<C>,
}

impl DenseState {
    pub fn zero_state(n: usize) -> DenseState {
        let mut amps = vec![C::ZERO; 1 << n];
        amps[0] = C::ONE;
        DenseState { n, amps }
    }

    pub fn apply_1q(&mut self, q: usize, u: U2) {
        let step = 1usize << q;
        for base in 0..self.amps.len() {
            if base & step == 0 {
                let a0 = self.amps[base];
                let a1 = self.amps[base + step];
                self.amps[base] = u[0][0].mul(a0).add(u[0][1].mul(a1));
                self.amps[base + step] = u[1][0].mul(a0).add(u[1][1].mul(a1));
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for idx in 0..self.amps.len() {
            if idx & cbit != 0 && idx & tbit == 0 {
                self.amps.swap(idx, idx | tbit);
            }
        }
    }

    /// Applies a circuit, mapping qubit labels to positions.
    pub fn apply_circuit(&mut self, circuit: &Circuit) {
        for layer in circuit.layers() {
            for gate in layer.gates() {
                match *gate {
                    Gate::Cliff { c, q } => {
                        let pos = circuit.position(q).expect("qubit in circuit");
                        self.apply_1q(pos, cliff_unitary(c));
                    }
                    Gate::Cx { control, target } => {
                        let pc = circuit.position(control).expect("qubit in circuit");
                        let pt = circuit.position(target).expect("qubit in circuit");
                        self.apply_cx(pc, pt);
                    }
                }
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sq()).collect()
    }

    /// The single basis state carrying all amplitude, if there is one.
    pub fn basis_state(&self) -> Option<u64> {
        let probs = self.probabilities();
        let mut hit = None;
        for (idx, p) in probs.iter().enumerate() {
            if *p > 1e-9 {
                if (*p - 1.0).abs() < 1e-9 && hit.is_none() {
                    hit = Some(idx as u64);
                } else {
                    return None;
                }
            }
        }
        hit
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

// ---- Pauli-transfer-matrix process fidelity ----------------------------

fn pauli_1q(code: usize) -> U2 {
    match code {
        0 => [[C::ONE, C::ZERO], [C::ZERO, C::ONE]],
        1 => [[C::ZERO, C::ONE], [C::ONE, C::ZERO]],
        2 => [
            [C::ZERO, C::new(0.0, -1.0)],
            [C::new(0.0, 1.0), C::ZERO],
        ],
        _ => [[C::ONE, C::ZERO], [C::ZERO, C::new(-1.0, 0.0)]],
    }
}

/// Dense n-qubit operator as a 2^n x 2^n matrix (row-major).
#[derive(Clone)]
pub struct DenseOp {
    dim: usize,
    data: Vec<C>,
}

impl DenseOp {
    pub fn identity(n: usize) -> DenseOp {
        let dim = 1 << n;
        let mut data = vec![C::ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C::ONE;
        }
        DenseOp { dim, data }
    }

    fn get(&self, i: usize, j: usize) -> C {
        self.data[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.dim + j] = v;
    }

    /// Matrix element (i, j).
    pub fn entry(&self, i: usize, j: usize) -> C {
        self.get(i, j)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Scales every entry by a real factor.
    pub fn scale(mut self, factor: f64) -> DenseOp {
        for v in self.data.iter_mut() {
            *v = C::new(v.re * factor, v.im * factor);
        }
        self
    }

    /// n-qubit Pauli with base-4 digit code (qubit q = digits (code >> 2q) & 3).
    pub fn pauli(n: usize, code: usize) -> DenseOp {
        let dim = 1 << n;
        let mut out = DenseOp::identity(0); // 1x1 seed
        out.dim = 1;
        out.data = vec![C::ONE];
        for q in 0..n {
            let factor = pauli_1q((code >> (2 * q)) & 3);
            out = out.kron_front(factor);
        }
        debug_assert_eq!(out.dim, dim);
        out
    }

    /// Kronecker product placing `factor` on the next-higher qubit:
    /// new = factor (x) self, so qubit 0 stays the least significant bit.
    fn kron_front(&self, factor: U2) -> DenseOp {
        let d = self.dim;
        let nd = d * 2;
        let mut out = DenseOp {
            dim: nd,
            data: vec![C::ZERO; nd * nd],
        };
        for bi in 0..2 {
            for bj in 0..2 {
                let f = factor[bi][bj];
                if f == C::ZERO {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        out.set(bi * d + i, bj * d + j, f.mul(self.get(i, j)));
                    }
                }
            }
        }
        out
    }

    /// Embeds a single-qubit unitary at position q.
    pub fn embed_1q(n: usize, q: usize, u: U2) -> DenseOp {
        let mut out = DenseOp::identity(0);
        out.dim = 1;
        out.data = vec![C::ONE];
        for pos in 0..n {
            let f = if pos == q {
                u
            } else {
                pauli_1q(0)
            };
            out = out.kron_front(f);
        }
        out
    }

    pub fn embed_cx(n: usize, control: usize, target: usize) -> DenseOp {
        let dim = 1 << n;
        let mut out = DenseOp {
            dim,
            data: vec![C::ZERO; dim * dim],
        };
        for col in 0..dim {
            let row = if col & (1 << control) != 0 {
                col ^ (1 << target)
            } else {
                col
            };
            out.set(row, col, C::ONE);
        }
        out
    }

    pub fn matmul(&self, o: &DenseOp) -> DenseOp {
        let d = self.dim;
        let mut out = DenseOp {
            dim: d,
            data: vec![C::ZERO; d * d],
        };
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == C::ZERO {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j).add(a.mul(o.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> DenseOp {
        let d = self.dim;
        let mut out = DenseOp {
            dim: d,
            data: vec![C::ZERO; d * d],
        };
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    fn trace(&self) -> C {
        let mut t = C::ZERO;
        for i in 0..self.dim {
            t = t.add(self.get(i, i));
        }
        t
    }
}

/// Pauli transfer matrix of a unitary: R[i][j] = tr(P_i U P_j U^dag) / 2^n.
pub fn ptm_of_unitary(n: usize, u: &DenseOp) -> Vec<Vec<f64>> {
    let paulis: Vec<DenseOp> = (0..1usize << (2 * n)).map(|c| DenseOp::pauli(n, c)).collect();
    let udag = u.dagger();
    let dim = 1 << n;
    let mut r = vec![vec![0.0; paulis.len()]; paulis.len()];
    for (j, pj) in paulis.iter().enumerate() {
        let conj = u.matmul(pj).matmul(&udag);
        for (i, pi) in paulis.iter().enumerate() {
            let t = pi.matmul(&conj).trace();
            r[i][j] = t.re / dim as f64;
        }
    }
    r
}

/// PTM of the uniform stochastic Pauli channel on a support set: with
/// probability e, a uniformly random non-identity Pauli on the support is
/// applied. Diagonal in the Pauli basis: lambda_P = 1 for Paulis acting as
/// identity on the support, 1 - e * 4^s / (4^s - 1) otherwise.
pub fn uniform_pauli_channel_diag(n: usize, support: &[usize], e: f64) -> Vec<f64> {
    let s = support.len() as i32;
    let shrink = 1.0 - e * libm::exp2(2.0 * s as f64) / (libm::exp2(2.0 * s as f64) - 1.0);
    (0..1usize << (2 * n))
        .map(|code| {
            let touches = support
                .iter()
                .any(|&q| (code >> (2 * q)) & 3 != 0);
            if touches {
                shrink
            } else {
                1.0
            }
        })
        .collect()
}

/// Process fidelity of a circuit's noisy implementation against its ideal
/// unitary, under the per-gate stochastic Pauli model (readout confusion is
/// SPAM and not part of the circuit's channel). Brute-force PTM composition.
pub fn process_fidelity_oracle(circuit: &Circuit, noise: &NoiseModel) -> f64 {
    let n = circuit.width();
    let np = 1usize << (2 * n);
    // noisy channel PTM, gate by gate
    let mut r_noisy = vec![vec![0.0; np]; np];
    for (i, row) in r_noisy.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut u_ideal = DenseOp::identity(n);
    for layer in circuit.layers() {
        for gate in layer.gates() {
            let (gate_op, support, e) = match *gate {
                Gate::Cliff { c, q } => {
                    let pos = circuit.position(q).expect("qubit in circuit");
                    let op = DenseOp::embed_1q(n, pos, cliff_unitary(c));
                    let e = if c.is_identity() {
                        0.0
                    } else {
                        noise.e1(q).expect("rate present")
                    };
                    (op, vec![pos], e)
                }
                Gate::Cx { control, target } => {
                    let pc = circuit.position(control).expect("qubit in circuit");
                    let pt = circuit.position(target).expect("qubit in circuit");
                    let op = DenseOp::embed_cx(n, pc, pt);
                    let e = noise.e2(control, target).expect("rate present");
                    (op, vec![pc, pt], e)
                }
            };
            let r_gate = ptm_of_unitary(n, &gate_op);
            r_noisy = mat_mul_real(&r_gate, &r_noisy);
            if e > 0.0 {
                let diag = uniform_pauli_channel_diag(n, &support, e);
                for (i, row) in r_noisy.iter_mut().enumerate() {
                    for v in row.iter_mut() {
                        *v *= diag[i];
                    }
                }
            }
            u_ideal = gate_op.matmul(&u_ideal);
        }
    }
    let r_ideal = ptm_of_unitary(n, &u_ideal);
    // F = tr(R_noisy R_ideal^T) / 4^n (the ideal PTM is orthogonal)
    let mut acc = 0.0;
    for i in 0..np {
        for j in 0..np {
            acc += r_noisy[i][j] * r_ideal[i][j];
        }
    }
    acc / np as f64
}

fn mat_mul_real(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let v = a[i][k];
            if v == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += v * b[k][j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_unitaries_are_unitary_and_distinct() {
        for c in Cliff1::all() {
            let u = cliff_unitary(c);
            // U U^dag = I
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = C::ZERO;
                    for k in 0..2 {
                        acc = acc.add(u[i][k].mul(u[j][k].conj()));
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((acc.re - expect).abs() < 1e-12);
                    assert!(acc.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_channel_has_unit_fidelity() {
        let circuit = Circuit::new(
            alloc::vec![0, 1],
            alloc::vec![crate::circuit::Layer::identity(&[0, 1])],
        )
        .unwrap();
        let noise = NoiseModel::uniform(&[0, 1], 0.1, 0.1, Default::default());
        let f = process_fidelity_oracle(&circuit, &noise);
        assert!((f - 1.0).abs() < 1e-10, "{}", f);
    }

    #[test]
    fn single_noisy_gate_matches_depolarizing_formula() {
        // one X gate with rate e: F = 1 - e (4^1)/(4^1-1) * (4^1-1)/4^1 = 1 - e
        let e = 0.02;
        let circuit = Circuit::new(
            alloc::vec![0],
            alloc::vec![crate::circuit::Layer::new(alloc::vec![Gate::Cliff {
                c: Cliff1::X,
                q: 0,
            }])
            .unwrap()],
        )
        .unwrap();
        let noise = NoiseModel::uniform(&[0], e, 0.0, Default::default());
        let f = process_fidelity_oracle(&circuit, &noise);
        // uniform Pauli channel: lambda = 1 - 4e/3 on 3 Paulis,
        // F = (1 + 3 lambda)/4 = 1 - e
        assert!((f - (1.0 - e)).abs() < 1e-10, "{}", f);
    }
}
