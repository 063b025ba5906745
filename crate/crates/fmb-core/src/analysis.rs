//! Dataset assembly, train/test evaluation, the monotonicity metric delta_v,
//! and volumetric summaries.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{DesignPlan, FeatureSpace};
use crate::estimate::{bootstrap_stderr, CapabilityRecord, EstimateError};
use crate::gp::GpModel;
use crate::monotonic::{MonotonicError, MonotonicGpModel};
use crate::stream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("results are missing {0} (vector, circuit) records; first gaps: {1:?}")]
    MissingRecords(usize, Vec<(usize, usize)>),
    #[error("prediction/observation lengths differ")]
    LengthMismatch,
    #[error("train fraction must lie strictly between 0 and 1")]
    BadFraction,
    #[error("a split side would be empty")]
    EmptySplit,
    #[error("axis `{0}` is not part of the feature space")]
    UnknownAxis(String),
    #[error("need at least {0} feature vectors")]
    TooFewVectors(usize),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Gp(#[from] crate::gp::GpError),
    #[error(transparent)]
    Monotonic(#[from] MonotonicError),
}

/// Per-feature-vector summary: the K per-circuit estimates, their mean, and
/// a bootstrap standard error. Estimates are kept unclamped; clamping is a
/// reporting concern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSummary {
    pub index: usize,
    pub vector: Vec<f64>,
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

/// The regression input: one summary per designed feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilityDataset {
    pub space: FeatureSpace,
    pub k: usize,
    pub per_vector: Vec<VectorSummary>,
}

impl CapabilityDataset {
    pub fn len(&self) -> usize {
        self.per_vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_vector.is_empty()
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.per_vector.iter().map(|s| s.vector.clone()).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.per_vector.iter().map(|s| s.mean).collect()
    }
}

const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Groups per-circuit records into per-vector summaries. Every (i, j) pair
/// of the design must be present exactly once.
pub fn assemble_dataset(
    design: &DesignPlan,
    records: &[CapabilityRecord],
    seed: u64,
) -> Result<CapabilityDataset, AnalysisError> {
    let (dataset, missing) = assemble_inner(design, records, seed, false)?;
    debug_assert!(missing.is_empty());
    Ok(dataset)
}

/// Like [`assemble_dataset`], but tolerates vectors with no records at all
/// (e.g. infeasible densities skipped by a non-strict run); those vector
/// indices are returned alongside. Partial vectors are still an error.
pub fn assemble_dataset_partial(
    design: &DesignPlan,
    records: &[CapabilityRecord],
    seed: u64,
) -> Result<(CapabilityDataset, Vec<usize>), AnalysisError> {
    assemble_inner(design, records, seed, true)
}

fn assemble_inner(
    design: &DesignPlan,
    records: &[CapabilityRecord],
    seed: u64,
    allow_missing_vectors: bool,
) -> Result<(CapabilityDataset, Vec<usize>), AnalysisError> {
    let m = design.m();
    let k = design.k;
    let mut table: Vec<Vec<Option<f64>>> = alloc::vec![alloc::vec![None; k]; m];
    for r in records {
        if r.vector < m && r.circuit < k {
            table[r.vector][r.circuit] = Some(r.estimate);
        }
    }
    let mut gaps = Vec::new();
    let mut skipped = Vec::new();
    let mut per_vector = Vec::with_capacity(m);
    for (i, row) in table.into_iter().enumerate() {
        let present = row.iter().filter(|e| e.is_some()).count();
        if present == 0 && allow_missing_vectors {
            skipped.push(i);
            continue;
        }
        if present < k {
            gaps.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, e)| e.is_none())
                    .map(|(j, _)| (i, j)),
            );
            continue;
        }
        let estimates: Vec<f64> = row.into_iter().map(Option::unwrap).collect();
        let mean = estimates.iter().sum::<f64>() / k as f64;
        let mut rng = stream::derive(seed, &[0xb007, i as u64]);
        let stderr = bootstrap_stderr(&estimates, BOOTSTRAP_RESAMPLES, &mut rng)?;
        per_vector.push(VectorSummary {
            index: i,
            vector: design.vectors[i].clone(),
            estimates,
            mean,
            stderr,
        });
    }
    if !gaps.is_empty() {
        let total = gaps.len();
        gaps.truncate(8);
        return Err(AnalysisError::MissingRecords(total, gaps));
    }
    Ok((
        CapabilityDataset {
            space: design.space.clone(),
            k,
            per_vector,
        },
        skipped,
    ))
}

/// Mean absolute difference between predictions and observations.
pub fn delta_abs(predictions: &[f64], observations: &[f64]) -> Result<f64, AnalysisError> {
    if predictions.len() != observations.len() || predictions.is_empty() {
        return Err(AnalysisError::LengthMismatch);
    }
    Ok(predictions
        .iter()
        .zip(observations)
        .map(|(p, o)| (p - o).abs())
        .sum::<f64>()
        / predictions.len() as f64)
}

/// A reproducible train/test partition of vector indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniform random partition with train size floor(n * fraction).
pub fn split(n: usize, fraction: f64, seed: u64) -> Result<SplitSpec, AnalysisError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(AnalysisError::BadFraction);
    }
    let train_size = libm::floor(n as f64 * fraction) as usize;
    if train_size == 0 || train_size == n {
        return Err(AnalysisError::EmptySplit);
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = stream::derive(seed, &[0x5917]);
    indices.shuffle(&mut rng);
    let mut train = indices[..train_size].to_vec();
    let mut test = indices[train_size..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitSpec {
        train_fraction: fraction,
        seed,
        train,
        test,
    })
}

/// delta_v for one feature vector: the minimum capability difference against
/// all strictly smaller vectors, with the standard error of that difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaVEntry {
    pub index: usize,
    pub delta: f64,
    pub stderr: f64,
    pub comparators: usize,
}

/// delta_v report for one feature subset (axis indices kept).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub subset: Vec<usize>,
    pub entries: Vec<DeltaVEntry>,
    /// vectors with no strictly-smaller comparator under this subset
    pub incomparable: usize,
}

/// Computes delta_v under the strict product order on the given feature
/// subset: v' is a comparator of v when every kept feature of v' is <= the
/// corresponding feature of v and at least one is strictly smaller. Equal
/// projected vectors are not comparators of each other.
pub fn delta_v(dataset: &CapabilityDataset, subset: &[usize]) -> SubsetReport {
    let summaries = &dataset.per_vector;
    let mut entries = Vec::new();
    let mut incomparable = 0usize;
    for v in summaries {
        let mut best: Option<(f64, f64)> = None;
        let mut count = 0usize;
        for v2 in summaries {
            if strictly_smaller(&v2.vector, &v.vector, subset) {
                count += 1;
                let delta = v2.mean - v.mean;
                if best.as_ref().is_none_or(|(b, _)| delta < *b) {
                    let se = libm::sqrt(v.stderr * v.stderr + v2.stderr * v2.stderr);
                    best = Some((delta, se));
                }
            }
        }
        match best {
            Some((delta, stderr)) => entries.push(DeltaVEntry {
                index: v.index,
                delta,
                stderr,
                comparators: count,
            }),
            None => incomparable += 1,
        }
    }
    SubsetReport {
        subset: subset.to_vec(),
        entries,
        incomparable,
    }
}

fn strictly_smaller(a: &[f64], b: &[f64], subset: &[usize]) -> bool {
    let mut one_strict = false;
    for &j in subset {
        if a[j] > b[j] {
            return false;
        }
        if a[j] < b[j] {
            one_strict = true;
        }
    }
    one_strict
}

/// delta_v for the full feature set and every leave-one-out projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub full: SubsetReport,
    pub projections: Vec<SubsetReport>,
}

pub fn monotonicity_report(dataset: &CapabilityDataset) -> MonotonicityReport {
    let d = dataset.space.dimension();
    let full: Vec<usize> = (0..d).collect();
    let projections = (0..d)
        .map(|drop| {
            let subset: Vec<usize> = (0..d).filter(|&j| j != drop).collect();
            delta_v(dataset, &subset)
        })
        .collect();
    MonotonicityReport {
        full: delta_v(dataset, &full),
        projections,
    }
}

/// Either flavor of capability model, with one prediction interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CapabilityModel {
    Regular(GpModel),
    Monotonic(MonotonicGpModel),
}

impl CapabilityModel {
    pub fn predict(&self, x_raw: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), AnalysisError> {
        match self {
            CapabilityModel::Regular(m) => Ok(m.predict(x_raw)?),
            CapabilityModel::Monotonic(m) => Ok(m.predict(x_raw)?),
        }
    }
}

/// A capability heatmap over two feature axes; `values[i][j]` is the
/// clamped prediction at (x_values[i], y_values[j]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub x_axis: String,
    pub x_values: Vec<f64>,
    pub y_axis: String,
    pub y_values: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Evaluates a model on a 2-D grid over the named axes, holding every other
/// feature fixed, clamping predictions to [0, 1] for reporting.
pub fn continuous_volumetric_grid(
    model: &CapabilityModel,
    space: &FeatureSpace,
    x_axis: &str,
    y_axis: &str,
    fixed: &[(String, f64)],
    resolution: (usize, usize),
) -> Result<HeatmapGrid, AnalysisError> {
    let xi = space
        .axis_index(x_axis)
        .ok_or_else(|| AnalysisError::UnknownAxis(String::from(x_axis)))?;
    let yi = space
        .axis_index(y_axis)
        .ok_or_else(|| AnalysisError::UnknownAxis(String::from(y_axis)))?;
    let mut base: Vec<f64> = space.axes().iter().map(|a| a.min).collect();
    for (name, value) in fixed {
        let idx = space
            .axis_index(name)
            .ok_or_else(|| AnalysisError::UnknownAxis(name.clone()))?;
        base[idx] = *value;
    }
    let x_values = linspace(space.axes()[xi].min, space.axes()[xi].max, resolution.0);
    let y_values = linspace(space.axes()[yi].min, space.axes()[yi].max, resolution.1);
    let mut queries = Vec::with_capacity(resolution.0 * resolution.1);
    for &xv in &x_values {
        for &yv in &y_values {
            let mut v = base.clone();
            v[xi] = xv;
            v[yi] = yv;
            queries.push(v);
        }
    }
    let (means, _) = model.predict(&queries)?;
    let values = means
        .chunks(resolution.1)
        .map(|row| row.iter().map(|m| m.clamp(0.0, 1.0)).collect())
        .collect();
    Ok(HeatmapGrid {
        x_axis: String::from(x_axis),
        x_values,
        y_axis: String::from(y_axis),
        y_values,
        values,
    })
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// One train/test instance of the split-evaluation protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub instance: usize,
    pub seed: u64,
    pub train_size: usize,
    pub delta_abs: f64,
}

/// Runs the repeated-split protocol: for each of `instances` random splits
/// at the given training fraction, fit via `fit_predict` (training vectors,
/// training means, test vectors -> test predictions) and score delta_abs on
/// the held-out means. Returns the per-instance results with their mean and
/// standard deviation.
pub fn evaluate_splits<F>(
    dataset: &CapabilityDataset,
    fraction: f64,
    instances: usize,
    seed: u64,
    mut fit_predict: F,
) -> Result<(Vec<SplitEvaluation>, f64, f64), AnalysisError>
where
    F: FnMut(&[Vec<f64>], &[f64], &[Vec<f64>]) -> Result<Vec<f64>, AnalysisError>,
{
    if dataset.len() < 2 {
        return Err(AnalysisError::TooFewVectors(2));
    }
    let vectors = dataset.vectors();
    let means = dataset.means();
    let mut evals = Vec::with_capacity(instances);
    for inst in 0..instances {
        let split_seed = seed.wrapping_add(inst as u64);
        let spec = split(dataset.len(), fraction, split_seed)?;
        let train_x: Vec<Vec<f64>> = spec.train.iter().map(|&i| vectors[i].clone()).collect();
        let train_y: Vec<f64> = spec.train.iter().map(|&i| means[i]).collect();
        let test_x: Vec<Vec<f64>> = spec.test.iter().map(|&i| vectors[i].clone()).collect();
        let test_y: Vec<f64> = spec.test.iter().map(|&i| means[i]).collect();
        let preds = fit_predict(&train_x, &train_y, &test_x)?;
        let d = delta_abs(&preds, &test_y)?;
        evals.push(SplitEvaluation {
            instance: inst,
            seed: split_seed,
            train_size: spec.train.len(),
            delta_abs: d,
        });
    }
    let mean = evals.iter().map(|e| e.delta_abs).sum::<f64>() / instances.max(1) as f64;
    let sd = libm::sqrt(
        evals
            .iter()
            .map(|e| (e.delta_abs - mean) * (e.delta_abs - mean))
            .sum::<f64>()
            / instances.max(1) as f64,
    );
    Ok((evals, mean, sd))
}
