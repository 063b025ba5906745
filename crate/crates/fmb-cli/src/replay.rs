//! File-replay backend: serves stored outcome histograms (e.g. imported
//! device data) behind the standard executor interface. Circuits are
//! regenerated deterministically from the design and master seed; only the
//! counts come from the file.

use std::collections::BTreeMap;
use std::path::Path;

use rand_chacha::ChaCha12Rng;

use fmb_core::circuit::Circuit;
use fmb_core::sim::{Backend, Counts, JobKey, SimError};

use crate::formats;

#[derive(Debug, Clone)]
pub struct ReplayBackend {
    counts: BTreeMap<(usize, usize), Counts>,
}

impl ReplayBackend {
    pub fn from_file(path: &Path) -> Result<ReplayBackend, formats::FormatError> {
        Ok(ReplayBackend {
            counts: formats::read_counts(path)?,
        })
    }

    pub fn new(counts: BTreeMap<(usize, usize), Counts>) -> ReplayBackend {
        ReplayBackend { counts }
    }
}

impl Backend for ReplayBackend {
    fn execute(
        &self,
        key: JobKey,
        circuit: &Circuit,
        _shots: u64,
        _rng: &mut ChaCha12Rng,
    ) -> Result<Counts, SimError> {
        let counts = self
            .counts
            .get(&(key.vector, key.circuit))
            .ok_or_else(|| {
                SimError::MissingCounts(format!(
                    "no stored counts for vector {} circuit {}",
                    key.vector, key.circuit
                ))
            })?;
        if counts.width() != circuit.width() {
            return Err(SimError::WidthMismatch(counts.width(), circuit.width()));
        }
        Ok(counts.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fmb_core::stream;

    #[test]
    fn replay_serves_stored_counts_and_reports_gaps() {
        let mut stored = BTreeMap::new();
        let mut c = Counts::new(2);
        c.add(0b00, 100);
        stored.insert((0, 0), c.clone());
        let backend = ReplayBackend::new(stored);
        let circuit = Circuit::parse("L0: C0 0; C0 1\n").unwrap();
        let mut rng = stream::derive(0, &[]);
        let got = backend
            .execute(
                JobKey {
                    vector: 0,
                    circuit: 0,
                },
                &circuit,
                100,
                &mut rng,
            )
            .unwrap();
        assert_eq!(got, c);
        assert!(matches!(
            backend.execute(
                JobKey {
                    vector: 0,
                    circuit: 1
                },
                &circuit,
                100,
                &mut rng
            ),
            Err(SimError::MissingCounts(_))
        ));
    }
}
