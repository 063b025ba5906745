//! n-qubit Pauli operators with sign tracking.

use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::Pauli1;
use crate::sim::SimError;

/// A signed n-qubit Pauli operator, stored as per-qubit (x, z) symplectic
/// bits plus an overall sign. All representable operators are Hermitian
/// (the Y bookkeeping keeps signs in {+1, -1}), so P^2 = +I always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    negative: bool,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Result<PauliOperator, SimError> {
        if n == 0 || n > 64 {
            return Err(SimError::WidthTooLarge(n));
        }
        Ok(PauliOperator {
            n,
            x: 0,
            z: 0,
            negative: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn set_sign(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// True when the operator is a tensor product of only I and Z.
    pub fn is_z_type(&self) -> bool {
        self.x == 0
    }

    pub fn factor(&self, q: usize) -> Option<Pauli1> {
        Pauli1::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    pub fn set_factor(&mut self, q: usize, p: Option<Pauli1>) {
        let (x, z) = p.map_or((false, false), Pauli1::bits);
        self.x = (self.x & !(1 << q)) | ((x as u64) << q);
        self.z = (self.z & !(1 << q)) | ((z as u64) << q);
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti % 2 == 0
    }

    /// Uniformly random non-identity Pauli with + sign.
    pub fn random_nonidentity(n: usize, rng: &mut impl Rng) -> Result<PauliOperator, SimError> {
        let mut p = PauliOperator::identity(n)?;
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        loop {
            p.x = rng.random::<u64>() & mask;
            p.z = rng.random::<u64>() & mask;
            if !p.is_identity() {
                return Ok(p);
            }
        }
    }

    /// Eigenvalue of |x> under a Z-type operator: P|x> = (+-1)|x>.
    /// Returns None when the operator has X components.
    pub fn basis_eigenvalue(&self, outcome: u64) -> Option<i8> {
        if !self.is_z_type() {
            return None;
        }
        let parity = (self.z & outcome).count_ones() % 2 == 1;
        Some(if parity != self.negative { -1 } else { 1 })
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.n {
            let c = match self.factor(q) {
                None => 'I',
                Some(Pauli1::X) => 'X',
                Some(Pauli1::Y) => 'Y',
                Some(Pauli1::Z) => 'Z',
            };
            write!(f, "{}", c)?;
        }
        Ok(())
    }
}
