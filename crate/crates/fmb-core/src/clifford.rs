//! The 24 single-qubit Clifford gates `C0`..`C23` and their Pauli algebra.
//!
//! The canonical indexing is generated from words over {H, S} enumerated in
//! shortest-lex order (H before S), keeping each unitary the first time it
//! appears (modulo global phase). A word is a gate sequence in circuit order,
//! so the word `HS` means "apply H, then S". Under this indexing:
//!
//! - `C0` is the identity (empty word), `C1 = H`, `C2 = S`;
//! - the Pauli gates sit at `X = C12` (word `HSSH`), `Y = C23` (word
//!   `HSSHSS`), and `Z = C5` (word `SS`).

use serde::{Deserialize, Serialize};

/// A non-identity single-qubit Pauli, encoded by its (x, z) symplectic bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli1 {
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub const ALL: [Pauli1; 3] = [Pauli1::X, Pauli1::Y, Pauli1::Z];

    /// Symplectic bits (x, z): X = (1,0), Y = (1,1), Z = (0,1).
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Option<Pauli1> {
        match (x, z) {
            (true, false) => Some(Pauli1::X),
            (true, true) => Some(Pauli1::Y),
            (false, true) => Some(Pauli1::Z),
            (false, false) => None,
        }
    }
}

/// Conjugation data for one single-qubit Clifford: the signed images of X
/// and Z, plus the index of the group inverse.
#[derive(Debug, Clone, Copy)]
struct CliffData {
    x_image: Pauli1,
    x_neg: bool,
    z_image: Pauli1,
    z_neg: bool,
    inverse: u8,
}

use Pauli1::{X as PX, Y as PY, Z as PZ};

#[rustfmt::skip]
static TABLE: [CliffData; 24] = [
    // C0   word (empty)  X -> +X  Z -> +Z
    CliffData { x_image: PX, x_neg: false, z_image: PZ, z_neg: false, inverse: 0 },
    // C1   word H        X -> +Z  Z -> +X
    CliffData { x_image: PZ, x_neg: false, z_image: PX, z_neg: false, inverse: 1 },
    // C2   word S        X -> +Y  Z -> +Z
    CliffData { x_image: PY, x_neg: false, z_image: PZ, z_neg: false, inverse: 10 },
    // C3   word HS       X -> +Z  Z -> +Y
    CliffData { x_image: PZ, x_neg: false, z_image: PY, z_neg: false, inverse: 11 },
    // C4   word SH       X -> -Y  Z -> +X
    CliffData { x_image: PY, x_neg: true, z_image: PX, z_neg: false, inverse: 13 },
    // C5   word SS       X -> -X  Z -> +Z   (= Z)
    CliffData { x_image: PX, x_neg: true, z_image: PZ, z_neg: false, inverse: 5 },
    // C6   word HSH      X -> +X  Z -> -Y
    CliffData { x_image: PX, x_neg: false, z_image: PY, z_neg: true, inverse: 8 },
    // C7   word HSS      X -> +Z  Z -> -X
    CliffData { x_image: PZ, x_neg: false, z_image: PX, z_neg: true, inverse: 9 },
    // C8   word SHS      X -> +X  Z -> +Y
    CliffData { x_image: PX, x_neg: false, z_image: PY, z_neg: false, inverse: 6 },
    // C9   word SSH      X -> -Z  Z -> +X
    CliffData { x_image: PZ, x_neg: true, z_image: PX, z_neg: false, inverse: 7 },
    // C10  word SSS      X -> -Y  Z -> +Z
    CliffData { x_image: PY, x_neg: true, z_image: PZ, z_neg: false, inverse: 2 },
    // C11  word HSHS     X -> +Y  Z -> +X
    CliffData { x_image: PY, x_neg: false, z_image: PX, z_neg: false, inverse: 3 },
    // C12  word HSSH     X -> +X  Z -> -Z   (= X)
    CliffData { x_image: PX, x_neg: false, z_image: PZ, z_neg: true, inverse: 12 },
    // C13  word HSSS     X -> +Z  Z -> -Y
    CliffData { x_image: PZ, x_neg: false, z_image: PY, z_neg: true, inverse: 4 },
    // C14  word SHSS     X -> +Y  Z -> -X
    CliffData { x_image: PY, x_neg: false, z_image: PX, z_neg: true, inverse: 21 },
    // C15  word SSHS     X -> -Z  Z -> +Y
    CliffData { x_image: PZ, x_neg: true, z_image: PY, z_neg: false, inverse: 22 },
    // C16  word HSHSS    X -> -X  Z -> +Y
    CliffData { x_image: PX, x_neg: true, z_image: PY, z_neg: false, inverse: 16 },
    // C17  word HSSHS    X -> +Y  Z -> -Z
    CliffData { x_image: PY, x_neg: false, z_image: PZ, z_neg: true, inverse: 17 },
    // C18  word SHSSH    X -> -Y  Z -> -Z
    CliffData { x_image: PY, x_neg: true, z_image: PZ, z_neg: true, inverse: 18 },
    // C19  word SHSSS    X -> -X  Z -> -Y
    CliffData { x_image: PX, x_neg: true, z_image: PY, z_neg: true, inverse: 19 },
    // C20  word SSHSS    X -> -Z  Z -> -X
    CliffData { x_image: PZ, x_neg: true, z_image: PX, z_neg: true, inverse: 20 },
    // C21  word HSHSSH   X -> -Z  Z -> -Y
    CliffData { x_image: PZ, x_neg: true, z_image: PY, z_neg: true, inverse: 14 },
    // C22  word HSHSSS   X -> -Y  Z -> -X
    CliffData { x_image: PY, x_neg: true, z_image: PX, z_neg: true, inverse: 15 },
    // C23  word HSSHSS   X -> -X  Z -> -Z   (= Y)
    CliffData { x_image: PX, x_neg: true, z_image: PZ, z_neg: true, inverse: 23 },
];

/// Generating words, in index order. Kept for documentation and to let test
/// oracles rebuild the table from 2x2 unitaries.
pub static WORDS: [&str; 24] = [
    "", "H", "S", "HS", "SH", "SS", "HSH", "HSS", "SHS", "SSH", "SSS", "HSHS", "HSSH", "HSSS",
    "SHSS", "SSHS", "HSHSS", "HSSHS", "SHSSH", "SHSSS", "SSHSS", "HSHSSH", "HSHSSS", "HSSHSS",
];

/// One of the 24 single-qubit Clifford gates, identified by its canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cliff1(u8);

impl Cliff1 {
    pub const COUNT: u8 = 24;
    pub const IDENTITY: Cliff1 = Cliff1(0);
    pub const H: Cliff1 = Cliff1(1);
    pub const S: Cliff1 = Cliff1(2);
    pub const X: Cliff1 = Cliff1(12);
    pub const Y: Cliff1 = Cliff1(23);
    pub const Z: Cliff1 = Cliff1(5);

    /// The four Pauli gates as a designated subset of the group.
    pub const PAULIS: [Cliff1; 4] = [Cliff1::IDENTITY, Cliff1::X, Cliff1::Y, Cliff1::Z];

    pub fn new(index: u8) -> Option<Cliff1> {
        (index < Self::COUNT).then_some(Cliff1(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Cliff1> {
        (0..Self::COUNT).map(Cliff1)
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    pub fn inverse(self) -> Cliff1 {
        Cliff1(TABLE[self.0 as usize].inverse)
    }

    /// Signed image of a Pauli under conjugation: `C P C^dag = (-1)^neg Q`.
    pub fn conjugate(self, p: Pauli1) -> (Pauli1, bool) {
        let d = &TABLE[self.0 as usize];
        match p {
            Pauli1::X => (d.x_image, d.x_neg),
            Pauli1::Z => (d.z_image, d.z_neg),
            // Y = iXZ, so C Y C^dag = i (C X C^dag)(C Z C^dag).
            Pauli1::Y => {
                let (px, nx) = (d.x_image, d.x_neg);
                let (pz, nz) = (d.z_image, d.z_neg);
                let (q, extra_neg) = mul_paulis(px, pz);
                (q, nx ^ nz ^ extra_neg)
            }
        }
    }

    /// Symplectic action on frame bits, ignoring signs: (x, z) bit pair in,
    /// (x, z) bit pair out.
    pub fn frame_map(self, x: bool, z: bool) -> (bool, bool) {
        match Pauli1::from_bits(x, z) {
            None => (false, false),
            Some(p) => self.conjugate(p).0.bits(),
        }
    }

    /// The group element equal to `self` followed by `other` in circuit order.
    pub fn then(self, other: Cliff1) -> Cliff1 {
        // Composition determined by the conjugation images, which fix a
        // Clifford up to phase: find the table entry matching the composite
        // action C2 (C1 P C1^dag) C2^dag.
        let x = compose_image(self, other, Pauli1::X);
        let z = compose_image(self, other, Pauli1::Z);
        for c in Cliff1::all() {
            let d = &TABLE[c.0 as usize];
            if (d.x_image, d.x_neg) == x && (d.z_image, d.z_neg) == z {
                return c;
            }
        }
        unreachable!("single-qubit Clifford group is closed under composition")
    }

    /// Gates mapping +Z to the signed Pauli `(target, neg)` under conjugation,
    /// i.e. preparing the corresponding eigenstate from |0>. There are always
    /// exactly four.
    pub fn taking_z_to(target: Pauli1, neg: bool) -> impl Iterator<Item = Cliff1> {
        Cliff1::all().filter(move |c| c.conjugate(Pauli1::Z) == (target, neg))
    }

    /// Gates mapping the signed Pauli `(source, +)` to +Z under conjugation,
    /// used to rotate an observable into the measurement basis.
    pub fn taking_to_z(source: Pauli1) -> impl Iterator<Item = Cliff1> {
        Cliff1::all().filter(move |c| c.conjugate(source) == (Pauli1::Z, false))
    }
}

fn compose_image(first: Cliff1, second: Cliff1, p: Pauli1) -> (Pauli1, bool) {
    let (q, n1) = first.conjugate(p);
    let (r, n2) = second.conjugate(q);
    (r, n1 ^ n2)
}

/// Product of two distinct non-identity Paulis as a signed Pauli, dropping a
/// global factor of i: P Q = i^k (-1)^neg R. Only the sign relative to the
/// Hermitian product matters here, and it is fixed by the cyclic order
/// (XZ = -iY, so X.Z -> (Y, neg) with neg encoding the -i vs +i choice).
fn mul_paulis(a: Pauli1, b: Pauli1) -> (Pauli1, bool) {
    debug_assert_ne!(a, b);
    // i * a * b for the Y = iXZ bookkeeping: returns (r, neg) with
    // i * a * b = (-1)^neg r when (a, b) is (X, Z)-like.
    match (a, b) {
        (Pauli1::X, Pauli1::Z) => (Pauli1::Y, false),
        (Pauli1::Z, Pauli1::X) => (Pauli1::Y, true),
        (Pauli1::X, Pauli1::Y) => (Pauli1::Z, true),
        (Pauli1::Y, Pauli1::X) => (Pauli1::Z, false),
        (Pauli1::Y, Pauli1::Z) => (Pauli1::X, true),
        (Pauli1::Z, Pauli1::Y) => (Pauli1::X, false),
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_pauli_constants_fixed() {
        assert!(Cliff1::IDENTITY.is_identity());
        assert_eq!(Cliff1::X.index(), 12);
        assert_eq!(Cliff1::Y.index(), 23);
        assert_eq!(Cliff1::Z.index(), 5);
        // X: X -> +X, Z -> -Z, and so on.
        assert_eq!(Cliff1::X.conjugate(Pauli1::X), (Pauli1::X, false));
        assert_eq!(Cliff1::X.conjugate(Pauli1::Z), (Pauli1::Z, true));
        assert_eq!(Cliff1::Z.conjugate(Pauli1::X), (Pauli1::X, true));
        assert_eq!(Cliff1::Y.conjugate(Pauli1::X), (Pauli1::X, true));
        assert_eq!(Cliff1::Y.conjugate(Pauli1::Z), (Pauli1::Z, true));
    }

    #[test]
    fn every_gate_has_an_inverse_in_the_table() {
        for c in Cliff1::all() {
            assert_eq!(c.then(c.inverse()), Cliff1::IDENTITY, "C{}", c.index());
            assert_eq!(c.inverse().then(c), Cliff1::IDENTITY, "C{}", c.index());
        }
    }

    #[test]
    fn group_closed_under_composition() {
        for a in Cliff1::all() {
            for b in Cliff1::all() {
                let _ = a.then(b); // panics if the composite is not in the table
            }
        }
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        assert_eq!(Cliff1::H.conjugate(Pauli1::X), (Pauli1::Z, false));
        assert_eq!(Cliff1::H.conjugate(Pauli1::Z), (Pauli1::X, false));
        assert_eq!(Cliff1::H.conjugate(Pauli1::Y), (Pauli1::Y, true));
    }

    #[test]
    fn state_prep_and_measurement_sets_have_four_gates_each() {
        for p in Pauli1::ALL {
            for neg in [false, true] {
                assert_eq!(Cliff1::taking_z_to(p, neg).count(), 4);
            }
            assert_eq!(Cliff1::taking_to_z(p).count(), 4);
        }
    }

    #[test]
    fn conjugation_images_anticommute() {
        // The images of X and Z must themselves anticommute for every gate.
        for c in Cliff1::all() {
            let (px, _) = c.conjugate(Pauli1::X);
            let (pz, _) = c.conjugate(Pauli1::Z);
            assert_ne!(px, pz, "C{}", c.index());
        }
    }
}
