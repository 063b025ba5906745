//! The benchmark execution pipeline: interprets a design's feature vectors,
//! samples circuits, executes them on a backend, and reduces counts to
//! per-circuit capability records.
//!
//! Per-job RNG streams are derived from (master seed, vector index, circuit
//! index, purpose), so jobs can run in any order or in parallel and still
//! reproduce byte-identical results.
//!
//! For SR-DFE runs each designed circuit j produces two executions: the DFE
//! circuit itself (keyed by circuit index j) and its SPAM reference (keyed
//! by circuit index j + K). The K references at a feature vector are averaged
//! to correct the K circuit estimates at that vector.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, ConnectivityGraph};
use crate::design::DesignPlan;
use crate::estimate::{
    build_srdfe_bundle, dfe_fidelity, estimate_p3_expectation, estimate_success_probability,
    srdfe_fidelity, CapabilityRecord, EstimateError, EstimatorKind,
};
use crate::sampler::{
    sample_fixed_density_circuit, sample_mirror_circuit, FixedDensitySamplerConfig,
    MirrorSamplerConfig, QubitChoice, SamplerError,
};
use crate::sim::{simulate_ideal_output, Backend, JobKey, PauliOperator, SimError};
use crate::stream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("design needs a width axis and a depth axis (named w/width, d/depth)")]
    MissingAxes,
    #[error("success probability needs a definite-outcome circuit family")]
    EstimatorFamilyMismatch,
    #[error("need at least one shot")]
    NoShots,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

/// The circuit distribution a run draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitFamily {
    Mirror,
    FixedDensity,
}

/// Role of one executed circuit within its job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitRole {
    Main,
    SpamReference,
}

/// Everything a run needs besides the design and the backend.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub family: CircuitFamily,
    pub estimator: EstimatorKind,
    pub shots: u64,
    pub master_seed: u64,
    pub connectivity: ConnectivityGraph,
    pub qubit_choice: QubitChoice,
    /// Two-qubit density pseudo-feature used when the design has no density
    /// axis.
    pub default_xi: f64,
}

impl RunPlan {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.shots == 0 {
            return Err(BenchError::NoShots);
        }
        if self.estimator == EstimatorKind::SuccessProb && self.family != CircuitFamily::Mirror {
            return Err(BenchError::EstimatorFamilyMismatch);
        }
        Ok(())
    }
}

/// One (vector, circuit) cell of the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    pub vector: usize,
    pub circuit: usize,
}

pub fn jobs(design: &DesignPlan) -> Vec<JobSpec> {
    let mut out = Vec::with_capacity(design.m() * design.k);
    for vector in 0..design.m() {
        for circuit in 0..design.k {
            out.push(JobSpec { vector, circuit });
        }
    }
    out
}

/// The (w, d, xi) interpretation of one feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorParams {
    pub w: usize,
    pub d: usize,
    pub xi: f64,
}

/// Extracts width/depth/density from a design vector by axis name.
pub fn vector_params(
    design: &DesignPlan,
    vector: usize,
    default_xi: f64,
) -> Result<VectorParams, BenchError> {
    let space = &design.space;
    let find = |names: &[&str]| {
        names
            .iter()
            .find_map(|n| space.axis_index(n))
    };
    let wi = find(&["w", "width"]).ok_or(BenchError::MissingAxes)?;
    let di = find(&["d", "depth"]).ok_or(BenchError::MissingAxes)?;
    let xi_idx = find(&["xi2q", "xi", "xi_2q"]);
    let v = &design.vectors[vector];
    Ok(VectorParams {
        w: libm::floor(v[wi] + 0.5) as usize,
        d: libm::floor(v[di] + 0.5) as usize,
        xi: xi_idx.map_or(default_xi, |i| v[i]),
    })
}

/// One circuit ready to execute, with the bookkeeping its estimator needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedExecution {
    pub key: JobKey,
    pub role: CircuitRole,
    pub circuit: Circuit,
    /// Success-probability target bit string (definite-outcome circuits).
    pub target: Option<u64>,
    /// SR-DFE observable.
    pub p3: Option<PauliOperator>,
}

/// A fully sampled job: one execution for success probability, two (circuit
/// + SPAM reference) for SR-DFE.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedJob {
    pub spec: JobSpec,
    pub width: usize,
    pub executions: Vec<PreparedExecution>,
}

/// Outcome of preparing a job: infeasible feature vectors produce
/// record-level errors rather than failing the whole run.
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    Ok(PreparedJob),
    Infeasible { spec: JobSpec, reason: String },
}

/// Samples the job's circuits from the deterministic per-job stream.
pub fn prepare_job(
    design: &DesignPlan,
    plan: &RunPlan,
    spec: JobSpec,
) -> Result<Prepared, BenchError> {
    let params = vector_params(design, spec.vector, plan.default_xi)?;
    let mut rng = stream::derive(
        plan.master_seed,
        &[0x5a3e, spec.vector as u64, spec.circuit as u64],
    );
    let base = match plan.family {
        CircuitFamily::Mirror => {
            let cfg = MirrorSamplerConfig {
                connectivity: plan.connectivity.clone(),
                qubit_choice: plan.qubit_choice.clone(),
                xi: plan.default_xi,
            };
            sample_mirror_circuit(params.w, params.d, params.xi, &cfg, &mut rng)
        }
        CircuitFamily::FixedDensity => {
            let cfg = FixedDensitySamplerConfig {
                connectivity: plan.connectivity.clone(),
                qubit_choice: plan.qubit_choice.clone(),
            };
            sample_fixed_density_circuit(params.w, params.d, params.xi, &cfg, &mut rng)
        }
    };
    let base = match base {
        Ok(c) => c,
        Err(
            e @ (SamplerError::DensityInfeasible { .. }
            | SamplerError::BadBenchmarkDepth(_)
            | SamplerError::NoEdges),
        ) => {
            return Ok(Prepared::Infeasible {
                spec,
                reason: format!("{}", e),
            })
        }
        Err(e) => return Err(e.into()),
    };

    let executions = match plan.estimator {
        EstimatorKind::SuccessProb => {
            let target = simulate_ideal_output(&base)?;
            alloc::vec![PreparedExecution {
                key: JobKey {
                    vector: spec.vector,
                    circuit: spec.circuit,
                },
                role: CircuitRole::Main,
                circuit: base,
                target: Some(target),
                p3: None,
            }]
        }
        EstimatorKind::Srdfe => {
            let mut bundle_rng = stream::derive(
                plan.master_seed,
                &[0xdfe, spec.vector as u64, spec.circuit as u64],
            );
            let bundle = build_srdfe_bundle(&base, &mut bundle_rng)?;
            alloc::vec![
                PreparedExecution {
                    key: JobKey {
                        vector: spec.vector,
                        circuit: spec.circuit,
                    },
                    role: CircuitRole::Main,
                    circuit: bundle.main.circuit.clone(),
                    target: None,
                    p3: Some(bundle.main.p3),
                },
                PreparedExecution {
                    key: JobKey {
                        vector: spec.vector,
                        circuit: spec.circuit + design.k,
                    },
                    role: CircuitRole::SpamReference,
                    circuit: bundle.reference.circuit.clone(),
                    target: None,
                    p3: Some(bundle.reference.p3),
                },
            ]
        }
    };
    Ok(Prepared::Ok(PreparedJob {
        spec,
        width: params.w,
        executions,
    }))
}

/// Raw per-job measurement, before the per-vector SR-DFE correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMeasurement {
    pub spec: JobSpec,
    pub width: usize,
    pub value: RawValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RawValue {
    Success { estimate: f64 },
    Srdfe { p3_main: f64, p3_reference: f64 },
    Infeasible { reason: String },
}

/// Executes a prepared job on the backend.
pub fn execute_prepared(
    prepared: &PreparedJob,
    plan: &RunPlan,
    backend: &dyn Backend,
) -> Result<RawMeasurement, BenchError> {
    let mut values = Vec::with_capacity(prepared.executions.len());
    for exec in &prepared.executions {
        let mut rng = stream::derive(
            plan.master_seed,
            &[0xe8ec, exec.key.vector as u64, exec.key.circuit as u64],
        );
        let counts = backend.execute(exec.key, &exec.circuit, plan.shots, &mut rng)?;
        let value = match (exec.target, &exec.p3) {
            (Some(target), _) => estimate_success_probability(&counts, target)?,
            (None, Some(p3)) => estimate_p3_expectation(&counts, p3)?,
            (None, None) => unreachable!("execution carries a target or an observable"),
        };
        values.push(value);
    }
    let value = match plan.estimator {
        EstimatorKind::SuccessProb => RawValue::Success {
            estimate: values[0],
        },
        EstimatorKind::Srdfe => RawValue::Srdfe {
            p3_main: values[0],
            p3_reference: values[1],
        },
    };
    Ok(RawMeasurement {
        spec: prepared.spec,
        width: prepared.width,
        value,
    })
}

/// Reduces raw measurements to capability records. SR-DFE estimates at each
/// feature vector are corrected by the mean of that vector's K SPAM
/// references. Infeasible jobs are returned separately.
pub fn finalize(
    design: &DesignPlan,
    plan: &RunPlan,
    raw: &[RawMeasurement],
) -> Result<(Vec<CapabilityRecord>, Vec<(JobSpec, String)>), BenchError> {
    let mut records = Vec::with_capacity(raw.len());
    let mut infeasible = Vec::new();
    match plan.estimator {
        EstimatorKind::SuccessProb => {
            for m in raw {
                match &m.value {
                    RawValue::Success { estimate } => records.push(CapabilityRecord {
                        vector: m.spec.vector,
                        circuit: m.spec.circuit,
                        kind: EstimatorKind::SuccessProb,
                        estimate: *estimate,
                        shots: plan.shots,
                    }),
                    RawValue::Infeasible { reason } => {
                        infeasible.push((m.spec, reason.clone()))
                    }
                    RawValue::Srdfe { .. } => unreachable!("estimator mismatch"),
                }
            }
        }
        EstimatorKind::Srdfe => {
            // per-vector reference means
            let mut ref_sum = alloc::vec![0.0f64; design.m()];
            let mut ref_count = alloc::vec![0usize; design.m()];
            for m in raw {
                if let RawValue::Srdfe { p3_reference, .. } = &m.value {
                    ref_sum[m.spec.vector] += p3_reference;
                    ref_count[m.spec.vector] += 1;
                }
            }
            for m in raw {
                match &m.value {
                    RawValue::Srdfe { p3_main, .. } => {
                        let gamma_ref = ref_sum[m.spec.vector] / ref_count[m.spec.vector] as f64;
                        let fdfe_c = dfe_fidelity(*p3_main, m.width);
                        let fdfe_null = dfe_fidelity(gamma_ref, m.width);
                        let estimate = srdfe_fidelity(fdfe_c, fdfe_null, m.width)?;
                        records.push(CapabilityRecord {
                            vector: m.spec.vector,
                            circuit: m.spec.circuit,
                            kind: EstimatorKind::Srdfe,
                            estimate,
                            shots: plan.shots,
                        });
                    }
                    RawValue::Infeasible { reason } => {
                        infeasible.push((m.spec, reason.clone()))
                    }
                    RawValue::Success { .. } => unreachable!("estimator mismatch"),
                }
            }
        }
    }
    records.sort_by_key(|r| (r.vector, r.circuit));
    infeasible.sort_by(|a, b| (a.0.vector, a.0.circuit).cmp(&(b.0.vector, b.0.circuit)));
    Ok((records, infeasible))
}

/// Runs every job of the design sequentially (the reference path; the IO
/// crate parallelizes over the same prepare/execute calls).
pub fn run_benchmark(
    design: &DesignPlan,
    plan: &RunPlan,
    backend: &dyn Backend,
) -> Result<(Vec<CapabilityRecord>, Vec<(JobSpec, String)>), BenchError> {
    plan.validate()?;
    let mut raw = Vec::with_capacity(design.m() * design.k);
    for spec in jobs(design) {
        match prepare_job(design, plan, spec)? {
            Prepared::Ok(prepared) => raw.push(execute_prepared(&prepared, plan, backend)?),
            Prepared::Infeasible { spec, reason } => raw.push(RawMeasurement {
                spec,
                width: 0,
                value: RawValue::Infeasible { reason },
            }),
        }
    }
    finalize(design, plan, &raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{grid_design, FeatureAxis, FeatureSpace, Scale};
    use crate::sim::NoiselessBackend;
    use alloc::vec;

    fn mirror_plan(seed: u64) -> RunPlan {
        RunPlan {
            family: CircuitFamily::Mirror,
            estimator: EstimatorKind::SuccessProb,
            shots: 128,
            master_seed: seed,
            connectivity: ConnectivityGraph::line(6),
            qubit_choice: QubitChoice::FirstW,
            default_xi: 0.25,
        }
    }

    fn wd_design(k: usize) -> DesignPlan {
        let space = FeatureSpace::new(vec![
            FeatureAxis::new("w", Scale::Log2, 2.0, 6.0, true).unwrap(),
            FeatureAxis::new("d", Scale::Log2, 4.0, 16.0, true).unwrap(),
        ])
        .unwrap();
        grid_design(
            &space,
            &[vec![2.0, 4.0], vec![4.0, 8.0]],
            |_| false,
            k,
            0,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_mirror_runs_give_unit_success() {
        let design = wd_design(3);
        let plan = mirror_plan(42);
        let (records, infeasible) =
            run_benchmark(&design, &plan, &NoiselessBackend).unwrap();
        assert!(infeasible.is_empty());
        assert_eq!(records.len(), 4 * 3);
        for r in &records {
            assert_eq!(r.estimate, 1.0);
            assert_eq!(r.kind, EstimatorKind::SuccessProb);
        }
    }

    #[test]
    fn noiseless_srdfe_runs_give_unit_fidelity() {
        let design = wd_design(2);
        let plan = RunPlan {
            family: CircuitFamily::FixedDensity,
            estimator: EstimatorKind::Srdfe,
            shots: 64,
            master_seed: 7,
            connectivity: ConnectivityGraph::all_to_all(6),
            qubit_choice: QubitChoice::FirstW,
            default_xi: 0.25,
        };
        let (records, infeasible) =
            run_benchmark(&design, &plan, &NoiselessBackend).unwrap();
        assert!(infeasible.is_empty());
        assert_eq!(records.len(), 8);
        for r in &records {
            assert!((r.estimate - 1.0).abs() < 1e-12, "{}", r.estimate);
        }
    }

    #[test]
    fn runs_are_deterministic_and_seed_sensitive() {
        let design = wd_design(2);
        let plan = RunPlan {
            estimator: EstimatorKind::SuccessProb,
            ..mirror_plan(1)
        };
        let noise = crate::sim::NoiseModel::uniform(
            &[0, 1, 2, 3, 4, 5],
            0.002,
            0.02,
            crate::sim::noise::ReadoutConfusion {
                p10: 0.02,
                p01: 0.01,
            },
        );
        let backend = crate::sim::NoisyBackend::new(noise);
        let (a, _) = run_benchmark(&design, &plan, &backend).unwrap();
        let (b, _) = run_benchmark(&design, &plan, &backend).unwrap();
        assert_eq!(a, b);
        let plan2 = RunPlan {
            master_seed: 2,
            ..plan
        };
        let (c, _) = run_benchmark(&design, &plan2, &backend).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn estimator_family_mismatch_rejected() {
        let plan = RunPlan {
            family: CircuitFamily::FixedDensity,
            ..mirror_plan(1)
        };
        assert_eq!(plan.validate(), Err(BenchError::EstimatorFamilyMismatch));
    }

    #[test]
    fn infeasible_vectors_become_record_level_errors() {
        // mirror depth not divisible by 4
        let space = FeatureSpace::new(vec![
            FeatureAxis::new("w", Scale::Linear, 2.0, 6.0, true).unwrap(),
            FeatureAxis::new("d", Scale::Linear, 1.0, 16.0, true).unwrap(),
        ])
        .unwrap();
        let design = grid_design(
            &space,
            &[vec![2.0], vec![4.0, 6.0]],
            |_| false,
            2,
            0,
        )
        .unwrap();
        let plan = mirror_plan(3);
        let (records, infeasible) =
            run_benchmark(&design, &plan, &NoiselessBackend).unwrap();
        assert_eq!(records.len(), 2); // only d=4 succeeded
        assert_eq!(infeasible.len(), 2); // d=6 jobs flagged
        assert!(infeasible[0].1.contains("multiple of 4"));
    }

    #[test]
    fn srdfe_reference_keys_are_offset_by_k() {
        let design = wd_design(2);
        let plan = RunPlan {
            family: CircuitFamily::FixedDensity,
            estimator: EstimatorKind::Srdfe,
            ..mirror_plan(5)
        };
        match prepare_job(&design, &plan, JobSpec { vector: 1, circuit: 1 }).unwrap() {
            Prepared::Ok(job) => {
                assert_eq!(job.executions.len(), 2);
                assert_eq!(job.executions[0].key.circuit, 1);
                assert_eq!(job.executions[1].key.circuit, 3); // j + K
                assert_eq!(job.executions[1].role, CircuitRole::SpamReference);
            }
            Prepared::Infeasible { .. } => unreachable!(),
        }
    }
}
