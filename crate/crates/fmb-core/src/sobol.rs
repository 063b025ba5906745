//! Sobol low-discrepancy sequence with Joe–Kuo direction numbers.
//!
//! Gray-code construction over the first ten dimensions of the Joe–Kuo
//! "new-joe-kuo-6" parameter set, which is plenty for the feature spaces this
//! toolkit handles. Index 0 of the standard sequence is the all-zeros point.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SobolError {
    #[error("sobol generator supports up to {max} dimensions, got {requested}")]
    UnsupportedDimension { requested: usize, max: usize },
}

const BITS: u32 = 52;

/// Joe–Kuo primitive-polynomial parameters (degree, coefficient a, initial
/// direction numbers m) for dimensions 2..=10. Dimension 1 is the van der
/// Corput sequence and needs no parameters.
const JOE_KUO: [(u32, u32, &[u64]); 9] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

pub const MAX_DIMENSION: usize = JOE_KUO.len() + 1;

/// Streaming Sobol point generator over `[0,1)^dim`.
pub struct SobolSequence {
    // direction numbers scaled to BITS bits, per dimension
    directions: Vec<[u64; BITS as usize]>,
    state: Vec<u64>,
    index: u64,
}

impl SobolSequence {
    pub fn new(dim: usize) -> Result<SobolSequence, SobolError> {
        if dim == 0 || dim > MAX_DIMENSION {
            return Err(SobolError::UnsupportedDimension {
                requested: dim,
                max: MAX_DIMENSION,
            });
        }
        let mut directions = Vec::with_capacity(dim);
        // dimension 1: v_k = 2^(BITS - k)
        let mut v = [0u64; BITS as usize];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1u64 << (BITS - 1 - k as u32);
        }
        directions.push(v);
        for &(s, a, m) in JOE_KUO.iter().take(dim.saturating_sub(1)) {
            let mut v = [0u64; BITS as usize];
            for k in 0..BITS as usize {
                if k < s as usize {
                    v[k] = m[k] << (BITS - 1 - k as u32);
                } else {
                    // recurrence: v_k = v_{k-s} ^ (v_{k-s} >> s) ^ sum a_i v_{k-i}
                    let mut val = v[k - s as usize] ^ (v[k - s as usize] >> s);
                    for i in 1..s as usize {
                        if (a >> (s as usize - 1 - i)) & 1 == 1 {
                            val ^= v[k - i];
                        }
                    }
                    v[k] = val;
                }
            }
            directions.push(v);
        }
        Ok(SobolSequence {
            directions,
            state: vec![0; dim],
            index: 0,
        })
    }

    /// The next point of the sequence. The first call returns index 0, the
    /// all-zeros point.
    pub fn next_point(&mut self) -> Vec<f64> {
        let point = self
            .state
            .iter()
            .map(|&s| s as f64 / (1u64 << BITS) as f64)
            .collect();
        // gray-code update: flip by the direction number of the lowest zero bit
        let c = self.index.trailing_ones() as usize;
        for (d, s) in self.state.iter_mut().enumerate() {
            *s ^= self.directions[d][c];
        }
        self.index += 1;
        point
    }

    /// First `count` points after skipping the all-zeros index-0 point.
    pub fn points_skipping_origin(dim: usize, count: usize) -> Result<Vec<Vec<f64>>, SobolError> {
        let mut seq = SobolSequence::new(dim)?;
        let _origin = seq.next_point();
        Ok((0..count).map(|_| seq.next_point()).collect())
    }
}
