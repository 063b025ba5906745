//! Calibration-table ingestion: the two-section CSV mirroring the IBM Q
//! calibration data layout (per-qubit device parameters, then per-qubit /
//! per-pair error rates), converted into the simulator's noise model.
//!
//! Error-rate percentages become per-application Pauli-error probabilities
//! directly; T1/T2/frequency columns are ingested and preserved for
//! provenance but unused by the stochastic-Pauli model.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use fmb_core::sim::noise::{NoiseModel, ReadoutConfusion};

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("cannot read calibration file: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("missing section: {0}")]
    MissingSection(&'static str),
    #[error("duplicate qubit {0}")]
    DuplicateQubit(String),
}

pub const CALIBRATION_HEADER: &str = "qubit,T1 (us),T2 (us),frequency (GHz),anharmonicity (GHz),readout error,Pr(prep 1, measure 0),Pr(prep 0, measure 1),readout length (ns)";
pub const ERROR_RATE_HEADER: &str =
    "qubit,Single Qubit Error (%),Gate Length (ns),qubits,Two Qubit Error (%),Gate Length (ns)";

/// One per-qubit device-parameter row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitRow {
    pub qubit: usize,
    pub t1_us: f64,
    pub t2_us: f64,
    pub frequency_ghz: f64,
    pub anharmonicity_ghz: f64,
    pub readout_error: f64,
    pub p10: f64,
    pub p01: f64,
    pub readout_length_ns: f64,
}

/// One single-qubit error-rate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneQubitErrorRow {
    pub qubit: usize,
    pub error_percent: f64,
    pub gate_length_ns: f64,
}

/// One two-qubit error-rate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitErrorRow {
    pub pair: (usize, usize),
    pub error_percent: f64,
    pub gate_length_ns: f64,
}

/// The parsed calibration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub qubits: Vec<QubitRow>,
    pub one_qubit: Vec<OneQubitErrorRow>,
    pub two_qubit: Vec<TwoQubitErrorRow>,
}

fn parse_qubit_label(s: &str, row: usize) -> Result<usize, CalibrationError> {
    s.trim()
        .strip_prefix('Q')
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CalibrationError::Row {
            row,
            reason: format!("bad qubit label `{}`", s),
        })
}

fn parse_f64(s: &str, what: &str, row: usize) -> Result<f64, CalibrationError> {
    s.trim().parse().map_err(|_| CalibrationError::Row {
        row,
        reason: format!("bad {} `{}`", what, s),
    })
}

/// Splits one CSV line honoring double-quoted fields (the pair column
/// contains a comma).
fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for ch in line.chars() {
        match ch {
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    fields.push(cur);
    fields
}

impl CalibrationTable {
    pub fn parse(text: &str) -> Result<CalibrationTable, CalibrationError> {
        let mut qubits = Vec::new();
        let mut one_qubit = Vec::new();
        let mut two_qubit = Vec::new();
        let mut section = 0; // 0: preamble, 1: calibration, 2: error rates
        let mut seen_cal: BTreeSet<usize> = BTreeSet::new();
        let mut seen_err: BTreeSet<usize> = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let row = idx + 1;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if line == CALIBRATION_HEADER {
                section = 1;
                continue;
            }
            if line == ERROR_RATE_HEADER {
                section = 2;
                continue;
            }
            let fields = split_csv_line(line);
            match section {
                1 => {
                    if fields.len() != 9 {
                        return Err(CalibrationError::Row {
                            row,
                            reason: format!("expected 9 columns, got {}", fields.len()),
                        });
                    }
                    let qubit = parse_qubit_label(&fields[0], row)?;
                    if !seen_cal.insert(qubit) {
                        return Err(CalibrationError::DuplicateQubit(fields[0].clone()));
                    }
                    qubits.push(QubitRow {
                        qubit,
                        t1_us: parse_f64(&fields[1], "T1", row)?,
                        t2_us: parse_f64(&fields[2], "T2", row)?,
                        frequency_ghz: parse_f64(&fields[3], "frequency", row)?,
                        anharmonicity_ghz: parse_f64(&fields[4], "anharmonicity", row)?,
                        readout_error: parse_f64(&fields[5], "readout error", row)?,
                        p10: parse_f64(&fields[6], "Pr(prep 1, measure 0)", row)?,
                        p01: parse_f64(&fields[7], "Pr(prep 0, measure 1)", row)?,
                        readout_length_ns: parse_f64(&fields[8], "readout length", row)?,
                    });
                }
                2 => {
                    if fields.len() != 6 {
                        return Err(CalibrationError::Row {
                            row,
                            reason: format!("expected 6 columns, got {}", fields.len()),
                        });
                    }
                    if !fields[0].trim().is_empty() {
                        let qubit = parse_qubit_label(&fields[0], row)?;
                        if !seen_err.insert(qubit) {
                            return Err(CalibrationError::DuplicateQubit(fields[0].clone()));
                        }
                        one_qubit.push(OneQubitErrorRow {
                            qubit,
                            error_percent: parse_f64(&fields[1], "1Q error", row)?,
                            gate_length_ns: parse_f64(&fields[2], "gate length", row)?,
                        });
                    }
                    if !fields[3].trim().is_empty() {
                        let pair_text = fields[3]
                            .trim()
                            .trim_start_matches('(')
                            .trim_end_matches(')');
                        let mut parts = pair_text.split(',');
                        let a = parse_qubit_label(parts.next().unwrap_or(""), row)?;
                        let b = parse_qubit_label(parts.next().unwrap_or(""), row)?;
                        two_qubit.push(TwoQubitErrorRow {
                            pair: (a, b),
                            error_percent: parse_f64(&fields[4], "2Q error", row)?,
                            gate_length_ns: parse_f64(&fields[5], "gate length", row)?,
                        });
                    }
                }
                _ => {
                    return Err(CalibrationError::Row {
                        row,
                        reason: "data before the calibration header".into(),
                    })
                }
            }
        }
        if qubits.is_empty() {
            return Err(CalibrationError::MissingSection("calibration"));
        }
        if one_qubit.is_empty() || two_qubit.is_empty() {
            return Err(CalibrationError::MissingSection("error rates"));
        }
        Ok(CalibrationTable {
            qubits,
            one_qubit,
            two_qubit,
        })
    }

    /// Converts tabulated rates into the stochastic-Pauli noise model:
    /// percentages become probabilities, readout confusion is copied per
    /// qubit, and the connectivity graph follows the two-qubit pair list.
    pub fn noise_model(&self) -> NoiseModel {
        let mut m = NoiseModel::new();
        for row in &self.one_qubit {
            m.set_e1(row.qubit, row.error_percent / 100.0);
        }
        for row in &self.two_qubit {
            m.set_e2(row.pair.0, row.pair.1, (row.error_percent / 100.0).min(1.0));
        }
        for row in &self.qubits {
            m.set_readout(
                row.qubit,
                ReadoutConfusion {
                    p10: row.p10,
                    p01: row.p01,
                },
            );
        }
        m
    }
}

/// Reads and converts a calibration file.
pub fn ingest_calibration(path: &Path) -> Result<(CalibrationTable, NoiseModel), CalibrationError> {
    let text = std::fs::read_to_string(path)?;
    let table = CalibrationTable::parse(&text)?;
    let model = table.noise_model();
    Ok((table, model))
}
