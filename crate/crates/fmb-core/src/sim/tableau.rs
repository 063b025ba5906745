//! Stabilizer tableau simulation (Aaronson–Gottesman style).
//!
//! The tableau tracks n destabilizer and n stabilizer generators as signed
//! Pauli rows. Gates update rows by conjugation; measurement follows the
//! standard row-reduction procedure with the phase function g.

use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::{Circuit, Gate};
use crate::clifford::{Cliff1, Pauli1};
use crate::sim::pauli::PauliOperator;
use crate::sim::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Row {
    x: u64,
    z: u64,
    negative: bool,
}

impl Row {
    fn zero() -> Row {
        Row {
            x: 0,
            z: 0,
            negative: false,
        }
    }
}

/// Phase contribution g(x1,z1,x2,z2) of multiplying single-qubit Pauli
/// factors, as an exponent of i in {-1, 0, 1}.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => (z2 as i32) * (2 * x2 as i32 - 1),
        (false, true) => (x2 as i32) * (1 - 2 * z2 as i32),
    }
}

/// Stabilizer tableau for up to 64 qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    /// rows 0..n destabilizers, rows n..2n stabilizers
    rows: Vec<Row>,
}

impl Tableau {
    /// Tableau of the all-zeros state |0...0>.
    pub fn new(n: usize) -> Result<Tableau, SimError> {
        if n == 0 || n > 64 {
            return Err(SimError::WidthTooLarge(n));
        }
        let mut rows = vec![Row::zero(); 2 * n];
        for q in 0..n {
            rows[q].x = 1 << q; // destabilizer X_q
            rows[n + q].z = 1 << q; // stabilizer Z_q
        }
        Ok(Tableau { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stabilizer generator i as a signed Pauli operator.
    pub fn stabilizer(&self, i: usize) -> PauliOperator {
        self.row_operator(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliOperator {
        self.row_operator(i)
    }

    fn row_operator(&self, r: usize) -> PauliOperator {
        let row = &self.rows[r];
        let mut p = PauliOperator::identity(self.n).unwrap();
        for q in 0..self.n {
            p.set_factor(
                q,
                Pauli1::from_bits((row.x >> q) & 1 == 1, (row.z >> q) & 1 == 1),
            );
        }
        p.set_sign(row.negative);
        p
    }

    /// row h <- row h * row i, with phase tracking.
    fn rowsum(&mut self, h: usize, i: usize) {
        let (rh, ri) = (self.rows[h], self.rows[i]);
        self.rows[h] = row_product(rh, ri);
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q >= self.n {
            return Err(SimError::QubitOutOfRange(q, self.n));
        }
        Ok(())
    }

    /// Applies one of the 24 single-qubit Cliffords to qubit q.
    pub fn apply_cliff(&mut self, c: Cliff1, q: usize) -> Result<(), SimError> {
        self.check_qubit(q)?;
        if c.is_identity() {
            return Ok(());
        }
        for row in &mut self.rows {
            let x = (row.x >> q) & 1 == 1;
            let z = (row.z >> q) & 1 == 1;
            if let Some(p) = Pauli1::from_bits(x, z) {
                let (image, neg) = c.conjugate(p);
                let (nx, nz) = image.bits();
                row.x = (row.x & !(1 << q)) | ((nx as u64) << q);
                row.z = (row.z & !(1 << q)) | ((nz as u64) << q);
                row.negative ^= neg;
            }
        }
        Ok(())
    }

    /// Applies CX with the given control and target.
    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        for row in &mut self.rows {
            let xc = (row.x >> control) & 1;
            let zc = (row.z >> control) & 1;
            let xt = (row.x >> target) & 1;
            let zt = (row.z >> target) & 1;
            row.negative ^= (xc & zt & (xt ^ zc ^ 1)) == 1;
            row.x ^= xc << target;
            row.z ^= zt << control;
        }
        Ok(())
    }

    /// Applies a gate expressed in tableau qubit positions.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        match *gate {
            Gate::Cliff { c, q } => self.apply_cliff(c, q),
            Gate::Cx { control, target } => self.apply_cx(control, target),
        }
    }

    /// Applies a whole circuit, mapping qubit labels to tableau positions.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<(), SimError> {
        for layer in circuit.layers() {
            for gate in layer.gates() {
                match *gate {
                    Gate::Cliff { c, q } => {
                        let p = circuit.position(q).ok_or(SimError::QubitOutOfRange(q, self.n))?;
                        self.apply_cliff(c, p)?;
                    }
                    Gate::Cx { control, target } => {
                        let pc = circuit
                            .position(control)
                            .ok_or(SimError::QubitOutOfRange(control, self.n))?;
                        let pt = circuit
                            .position(target)
                            .ok_or(SimError::QubitOutOfRange(target, self.n))?;
                        self.apply_cx(pc, pt)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether measuring Z_q gives a deterministic outcome.
    fn is_deterministic(&self, q: usize) -> bool {
        self.rows[self.n..].iter().all(|r| (r.x >> q) & 1 == 0)
    }

    /// Deterministic-measurement outcome of Z_q; the state must be an
    /// eigenstate of Z_q.
    fn deterministic_outcome(&self, q: usize) -> bool {
        let mut scratch = Row::zero();
        for i in 0..self.n {
            if (self.rows[i].x >> q) & 1 == 1 {
                scratch = row_product(scratch, self.rows[self.n + i]);
            }
        }
        scratch.negative
    }

    /// Measures every qubit, pinning random outcomes to 0. The result is a
    /// valid reference sample of the pre-measurement state; the tableau
    /// collapses accordingly.
    pub fn measure_all_reference(&mut self) -> u64 {
        let mut outcome = 0u64;
        for q in 0..self.n {
            let random_row = (self.n..2 * self.n).find(|&r| (self.rows[r].x >> q) & 1 == 1);
            match random_row {
                Some(p) => {
                    // random outcome, pinned to 0. The destabilizer paired
                    // with the pivot is skipped: it anticommutes with the
                    // pivot and is overwritten below.
                    for r in 0..2 * self.n {
                        if r != p && r != p - self.n && (self.rows[r].x >> q) & 1 == 1 {
                            self.rowsum(r, p);
                        }
                    }
                    self.rows[p - self.n] = self.rows[p];
                    self.rows[p] = Row {
                        x: 0,
                        z: 1 << q,
                        negative: false,
                    };
                }
                None => {
                    if self.deterministic_outcome(q) {
                        outcome |= 1 << q;
                    }
                }
            }
        }
        outcome
    }

    /// The deterministic output bit string, or an error when any qubit's
    /// measurement would be random.
    pub fn basis_state(&self) -> Result<u64, SimError> {
        let mut outcome = 0u64;
        for q in 0..self.n {
            if !self.is_deterministic(q) {
                return Err(SimError::NotDefiniteOutcome);
            }
            if self.deterministic_outcome(q) {
                outcome |= 1 << q;
            }
        }
        Ok(outcome)
    }
}

fn row_product(a: Row, b: Row) -> Row {
    let mut phase = 2 * (a.negative as i32) + 2 * (b.negative as i32);
    // only qubits where `a` is non-identity contribute a nonzero g
    let mut bits = a.x | a.z;
    while bits != 0 {
        let q = bits.trailing_zeros() as u64;
        bits &= bits - 1;
        phase += g(
            (a.x >> q) & 1 == 1,
            (a.z >> q) & 1 == 1,
            (b.x >> q) & 1 == 1,
            (b.z >> q) & 1 == 1,
        );
    }
    let m = phase.rem_euclid(4);
    debug_assert!(m == 0 || m == 2, "non-Hermitian Pauli product");
    Row {
        x: a.x ^ b.x,
        z: a.z ^ b.z,
        negative: m == 2,
    }
}

/// The deterministic output bit string of a definite-outcome circuit applied
/// to |0...0>, in circuit qubit positions.
pub fn simulate_ideal_output(circuit: &Circuit) -> Result<u64, SimError> {
    let mut t = Tableau::new(circuit.width())?;
    t.apply_circuit(circuit)?;
    t.basis_state()
}

/// Conjugates a Pauli operator through a circuit: returns U P U^dag with the
/// correct sign. The operator is indexed by circuit qubit positions.
pub fn conjugate_pauli(circuit: &Circuit, p: &PauliOperator) -> Result<PauliOperator, SimError> {
    if p.n() != circuit.width() {
        return Err(SimError::WidthMismatch(p.n(), circuit.width()));
    }
    let mut x = p.x_bits();
    let mut z = p.z_bits();
    let mut negative = p.is_negative();
    for layer in circuit.layers() {
        for gate in layer.gates() {
            match *gate {
                Gate::Cliff { c, q } => {
                    if c.is_identity() {
                        continue;
                    }
                    let pos = circuit
                        .position(q)
                        .ok_or(SimError::QubitOutOfRange(q, circuit.width()))?;
                    let xb = (x >> pos) & 1 == 1;
                    let zb = (z >> pos) & 1 == 1;
                    if let Some(f) = Pauli1::from_bits(xb, zb) {
                        let (image, neg) = c.conjugate(f);
                        let (nx, nz) = image.bits();
                        x = (x & !(1 << pos)) | ((nx as u64) << pos);
                        z = (z & !(1 << pos)) | ((nz as u64) << pos);
                        negative ^= neg;
                    }
                }
                Gate::Cx { control, target } => {
                    let pc = circuit
                        .position(control)
                        .ok_or(SimError::QubitOutOfRange(control, circuit.width()))?;
                    let pt = circuit
                        .position(target)
                        .ok_or(SimError::QubitOutOfRange(target, circuit.width()))?;
                    let xc = (x >> pc) & 1;
                    let zc = (z >> pc) & 1;
                    let xt = (x >> pt) & 1;
                    let zt = (z >> pt) & 1;
                    negative ^= (xc & zt & (xt ^ zc ^ 1)) == 1;
                    x ^= xc << pt;
                    z ^= zt << pc;
                }
            }
        }
    }
    let mut out = PauliOperator::identity(p.n())?;
    for q in 0..p.n() {
        out.set_factor(q, Pauli1::from_bits((x >> q) & 1 == 1, (z >> q) & 1 == 1));
    }
    out.set_sign(negative);
    Ok(out)
}
