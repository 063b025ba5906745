//! On-disk artifact formats. Every stage of the pipeline reads and writes
//! plain files: JSON for structured documents (designs, models), CSV for
//! tabular data (results, counts, reports), and a line-oriented text format
//! for circuit batches.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use fmb_core::analysis::{CapabilityModel, HeatmapGrid, SubsetReport};
use fmb_core::bench::CircuitRole;
use fmb_core::circuit::Circuit;
use fmb_core::design::DesignPlan;
use fmb_core::estimate::{CapabilityRecord, EstimatorKind};
use fmb_core::gp::FitReport;
use fmb_core::sim::Counts;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Malformed { path: String, reason: String },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn bad(path: &Path, reason: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

// ---- design file --------------------------------------------------------

pub fn write_design(path: &Path, design: &DesignPlan) -> Result<(), FormatError> {
    let json = serde_json::to_string_pretty(design)
        .map_err(|e| bad(path, format!("serialize: {}", e)))?;
    std::fs::write(path, json + "\n").map_err(|e| io_err(path, e))
}

pub fn read_design(path: &Path) -> Result<DesignPlan, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| bad(path, format!("parse: {}", e)))
}

// ---- results file -------------------------------------------------------

pub const RESULTS_HEADER: [&str; 6] = [
    "vector_index",
    "circuit_index",
    "estimator",
    "estimate",
    "shots",
    "stderr",
];

/// A record-level error entry for an infeasible job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleEntry {
    pub vector: usize,
    pub circuit: usize,
}

/// Writes capability records plus record-level error entries. Per-circuit
/// standard errors are included where available (binomial for success
/// probability).
pub fn write_results(
    path: &Path,
    records: &[CapabilityRecord],
    infeasible: &[InfeasibleEntry],
) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(RESULTS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        let (kind, stderr) = match r.kind {
            EstimatorKind::SuccessProb => {
                let p = r.estimate.clamp(0.0, 1.0);
                let se = (p * (1.0 - p) / r.shots as f64).sqrt();
                ("success_prob", format!("{}", se))
            }
            EstimatorKind::Srdfe => ("srdfe", String::new()),
        };
        w.write_record([
            r.vector.to_string(),
            r.circuit.to_string(),
            kind.to_string(),
            format!("{}", r.estimate),
            r.shots.to_string(),
            stderr,
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    for e in infeasible {
        w.write_record([
            e.vector.to_string(),
            e.circuit.to_string(),
            "error".to_string(),
            String::new(),
            "0".to_string(),
            String::new(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_results(
    path: &Path,
) -> Result<(Vec<CapabilityRecord>, Vec<InfeasibleEntry>), FormatError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut records = Vec::new();
    let mut infeasible = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let field = |j: usize| row.get(j).unwrap_or("").trim().to_string();
        let vector: usize = field(0)
            .parse()
            .map_err(|_| bad(path, format!("row {}: bad vector index", i + 2)))?;
        let circuit: usize = field(1)
            .parse()
            .map_err(|_| bad(path, format!("row {}: bad circuit index", i + 2)))?;
        match field(2).as_str() {
            "error" => infeasible.push(InfeasibleEntry { vector, circuit }),
            kind => {
                let kind = match kind {
                    "success_prob" => EstimatorKind::SuccessProb,
                    "srdfe" => EstimatorKind::Srdfe,
                    other => {
                        return Err(bad(path, format!("row {}: unknown estimator `{}`", i + 2, other)))
                    }
                };
                records.push(CapabilityRecord {
                    vector,
                    circuit,
                    kind,
                    estimate: field(3)
                        .parse()
                        .map_err(|_| bad(path, format!("row {}: bad estimate", i + 2)))?,
                    shots: field(4)
                        .parse()
                        .map_err(|_| bad(path, format!("row {}: bad shots", i + 2)))?,
                });
            }
        }
    }
    Ok((records, infeasible))
}

fn csv_err(path: &Path, e: csv::Error) -> FormatError {
    bad(path, format!("{}", e))
}

// ---- counts file --------------------------------------------------------

pub const COUNTS_HEADER: [&str; 4] = ["vector_index", "circuit_index", "bitstring", "count"];

/// Writes per-execution outcome histograms. SR-DFE SPAM references use
/// circuit indices j + K.
pub fn write_counts(
    path: &Path,
    counts: &BTreeMap<(usize, usize), Counts>,
) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(COUNTS_HEADER).map_err(|e| csv_err(path, e))?;
    for (&(vector, circuit), c) in counts {
        for (outcome, count) in c.iter() {
            w.write_record([
                vector.to_string(),
                circuit.to_string(),
                c.render_bitstring(outcome),
                count.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_counts(path: &Path) -> Result<BTreeMap<(usize, usize), Counts>, FormatError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut out: BTreeMap<(usize, usize), Counts> = BTreeMap::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let get = |j: usize| row.get(j).unwrap_or("").trim();
        let vector: usize = get(0)
            .parse()
            .map_err(|_| bad(path, format!("row {}: bad vector index", i + 2)))?;
        let circuit: usize = get(1)
            .parse()
            .map_err(|_| bad(path, format!("row {}: bad circuit index", i + 2)))?;
        let bits = get(2);
        let outcome = Counts::parse_bitstring(bits)
            .ok_or_else(|| bad(path, format!("row {}: bad bitstring `{}`", i + 2, bits)))?;
        let count: u64 = get(3)
            .parse()
            .map_err(|_| bad(path, format!("row {}: bad count", i + 2)))?;
        out.entry((vector, circuit))
            .or_insert_with(|| Counts::new(bits.len()))
            .add(outcome, count);
    }
    Ok(out)
}

// ---- circuit batch file -------------------------------------------------

/// One circuit of an exported batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchEntry {
    pub vector: usize,
    pub circuit: usize,
    pub role: CircuitRole,
    pub text: String,
}

/// Writes the batch: a commented header carrying the design reference and
/// seed, then per-circuit records.
pub fn write_batch(
    path: &Path,
    design_ref: &str,
    seed: u64,
    entries: &[BatchEntry],
) -> Result<(), FormatError> {
    let mut f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = String::new();
    out.push_str("# fmb circuit batch\n");
    out.push_str(&format!("# design: {}\n", design_ref));
    out.push_str(&format!("# seed: {}\n", seed));
    for e in entries {
        let role = match e.role {
            CircuitRole::Main => "main",
            CircuitRole::SpamReference => "spam_reference",
        };
        out.push_str(&format!("circuit {} {} {}\n", e.vector, e.circuit, role));
        out.push_str(&e.text);
        out.push_str("end\n");
    }
    f.write_all(out.as_bytes()).map_err(|e| io_err(path, e))
}

pub fn read_batch(path: &Path) -> Result<Vec<(BatchEntry, Circuit)>, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut entries = Vec::new();
    let mut current: Option<(usize, usize, CircuitRole, String)> = None;
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("circuit ") {
            if current.is_some() {
                return Err(bad(path, format!("line {}: unterminated record", i + 1)));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad(path, format!("line {}: bad record header", i + 1)));
            }
            let vector = parts[0]
                .parse()
                .map_err(|_| bad(path, format!("line {}: bad vector index", i + 1)))?;
            let circuit = parts[1]
                .parse()
                .map_err(|_| bad(path, format!("line {}: bad circuit index", i + 1)))?;
            let role = match parts[2] {
                "main" => CircuitRole::Main,
                "spam_reference" => CircuitRole::SpamReference,
                other => return Err(bad(path, format!("line {}: bad role `{}`", i + 1, other))),
            };
            current = Some((vector, circuit, role, String::new()));
        } else if line.trim() == "end" {
            let (vector, circuit, role, text) = current
                .take()
                .ok_or_else(|| bad(path, format!("line {}: end without record", i + 1)))?;
            let parsed = Circuit::parse(&text)
                .map_err(|e| bad(path, format!("record ({}, {}): {}", vector, circuit, e)))?;
            entries.push((
                BatchEntry {
                    vector,
                    circuit,
                    role,
                    text,
                },
                parsed,
            ));
        } else if let Some(rec) = current.as_mut() {
            rec.3.push_str(line);
            rec.3.push('\n');
        } else {
            return Err(bad(path, format!("line {}: data outside record", i + 1)));
        }
    }
    Ok(entries)
}

// ---- model file ---------------------------------------------------------

/// The persisted model document: the model itself, the feature space it was
/// trained over, and reproducibility metadata (optimizer seed and restart
/// log).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub space: fmb_core::design::FeatureSpace,
    pub model: CapabilityModel,
    pub fit: FitReport,
}

pub fn write_model(path: &Path, model: &ModelFile) -> Result<(), FormatError> {
    let json = serde_json::to_string_pretty(model)
        .map_err(|e| bad(path, format!("serialize: {}", e)))?;
    std::fs::write(path, json + "\n").map_err(|e| io_err(path, e))
}

pub fn read_model(path: &Path) -> Result<ModelFile, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| bad(path, format!("parse: {}", e)))
}

// ---- heatmap ------------------------------------------------------------

/// CSV matrix with axis header rows: the top-left cell names the axes as
/// `x/y`, the first row carries y values, each following row starts with an
/// x value.
pub fn write_heatmap(path: &Path, grid: &HeatmapGrid) -> Result<(), FormatError> {
    let mut out = String::new();
    out.push_str(&format!("{}/{}", grid.x_axis, grid.y_axis));
    for y in &grid.y_values {
        out.push_str(&format!(",{}", y));
    }
    out.push('\n');
    for (i, x) in grid.x_values.iter().enumerate() {
        out.push_str(&format!("{}", x));
        for v in &grid.values[i] {
            out.push_str(&format!(",{}", v));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

// ---- monotonicity report ------------------------------------------------

pub fn write_monotonicity(path: &Path, reports: &[&SubsetReport], axis_names: &[String]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["subset", "vector_index", "delta", "stderr", "comparators"])
        .map_err(|e| csv_err(path, e))?;
    for report in reports {
        let subset_name: Vec<&str> = report
            .subset
            .iter()
            .map(|&j| axis_names[j].as_str())
            .collect();
        let subset_name = subset_name.join("+");
        for e in &report.entries {
            w.write_record([
                subset_name.clone(),
                e.index.to_string(),
                format!("{}", e.delta),
                format!("{}", e.stderr),
                e.comparators.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

// ---- split summary ------------------------------------------------------

pub fn write_split_summary(
    path: &Path,
    evals: &[fmb_core::analysis::SplitEvaluation],
    mean: f64,
    sd: f64,
) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["instance", "seed", "train_size", "delta_abs"])
        .map_err(|e| csv_err(path, e))?;
    for e in evals {
        w.write_record([
            e.instance.to_string(),
            e.seed.to_string(),
            e.train_size.to_string(),
            format!("{}", e.delta_abs),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.write_record(["mean", "", "", &format!("{}", mean)])
        .map_err(|e| csv_err(path, e))?;
    w.write_record(["sd", "", "", &format!("{}", sd)])
        .map_err(|e| csv_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

// ---- predictions --------------------------------------------------------

pub fn write_predictions(
    path: &Path,
    axis_names: &[String],
    vectors: &[Vec<f64>],
    means: &[f64],
    vars: &[f64],
) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = axis_names.to_vec();
    header.extend(["mean".into(), "variance".into(), "clamped_mean".into()]);
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (i, v) in vectors.iter().enumerate() {
        let mut row: Vec<String> = v.iter().map(|x| format!("{}", x)).collect();
        row.push(format!("{}", means[i]));
        row.push(format!("{}", vars[i]));
        row.push(format!("{}", means[i].clamp(0.0, 1.0)));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fmb_core::design::{grid_design, FeatureAxis, FeatureSpace, Scale};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("fmb-format-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn design_round_trip() {
        let space = FeatureSpace::new(vec![
            FeatureAxis::new("w", Scale::Log2, 2.0, 8.0, true).unwrap(),
            FeatureAxis::new("d", Scale::Log2, 4.0, 64.0, true).unwrap(),
        ])
        .unwrap();
        let design =
            grid_design(&space, &[vec![2.0, 4.0], vec![4.0, 16.0]], |_| false, 5, 9).unwrap();
        let path = tmp("design.json");
        write_design(&path, &design).unwrap();
        let back = read_design(&path).unwrap();
        assert_eq!(back, design);
    }

    #[test]
    fn results_round_trip_with_error_entries() {
        let records = vec![
            CapabilityRecord {
                vector: 0,
                circuit: 0,
                kind: EstimatorKind::SuccessProb,
                estimate: 0.875,
                shots: 1024,
            },
            CapabilityRecord {
                vector: 0,
                circuit: 1,
                kind: EstimatorKind::Srdfe,
                estimate: 1.02,
                shots: 200,
            },
        ];
        let infeasible = vec![InfeasibleEntry {
            vector: 3,
            circuit: 0,
        }];
        let path = tmp("results.csv");
        write_results(&path, &records, &infeasible).unwrap();
        let (r, e) = read_results(&path).unwrap();
        assert_eq!(r, records);
        assert_eq!(e, infeasible);
    }

    #[test]
    fn counts_round_trip() {
        let mut counts = BTreeMap::new();
        let mut c = Counts::new(3);
        c.add(0b000, 500);
        c.add(0b101, 24);
        counts.insert((1, 2), c);
        let path = tmp("counts.csv");
        write_counts(&path, &counts).unwrap();
        let back = read_counts(&path).unwrap();
        assert_eq!(back, counts);
    }

    #[test]
    fn batch_round_trip() {
        let text = "L0: C3 0; CX 1 2\nL1: C0 0; C5 1; C12 2\n";
        let circuit = Circuit::parse(text).unwrap();
        let entries = vec![BatchEntry {
            vector: 2,
            circuit: 4,
            role: CircuitRole::Main,
            text: circuit.to_text(),
        }];
        let path = tmp("batch.txt");
        write_batch(&path, "design.json", 7, &entries).unwrap();
        let back = read_batch(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].0, entries[0]);
        assert_eq!(back[0].1, circuit);
    }
}
