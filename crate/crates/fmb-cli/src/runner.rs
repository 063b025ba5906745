//! Parallel benchmark execution driver. Jobs carry derived RNG streams, so
//! rayon can schedule them in any order; outputs are re-sorted before they
//! are written, keeping every artifact byte-deterministic.

use std::collections::BTreeMap;

use rayon::prelude::*;

use fmb_core::bench::{
    self, CircuitRole, JobSpec, Prepared, RawMeasurement, RawValue, RunPlan,
};
use fmb_core::design::DesignPlan;
use fmb_core::estimate::CapabilityRecord;
use fmb_core::sim::{Backend, Counts};
use fmb_core::stream;

use crate::formats::BatchEntry;

/// Everything a run produced: capability records, record-level errors, and
/// (when requested) the executed circuits and their raw histograms.
pub struct RunOutput {
    pub records: Vec<CapabilityRecord>,
    pub infeasible: Vec<(JobSpec, String)>,
    pub batch: Option<Vec<BatchEntry>>,
    pub counts: Option<BTreeMap<(usize, usize), Counts>>,
}

pub struct RunOptions {
    pub collect_batch: bool,
    pub collect_counts: bool,
}

/// Runs every job of the design in parallel on the backend.
pub fn run_parallel(
    design: &DesignPlan,
    plan: &RunPlan,
    backend: &dyn Backend,
    options: &RunOptions,
) -> anyhow::Result<RunOutput> {
    plan.validate()?;
    let specs = bench::jobs(design);

    struct JobResult {
        raw: RawMeasurement,
        batch: Vec<BatchEntry>,
        counts: Vec<((usize, usize), Counts)>,
    }

    let results: Result<Vec<JobResult>, bench::BenchError> = specs
        .par_iter()
        .map(|&spec| {
            let prepared = match bench::prepare_job(design, plan, spec)? {
                Prepared::Ok(p) => p,
                Prepared::Infeasible { spec, reason } => {
                    return Ok(JobResult {
                        raw: RawMeasurement {
                            spec,
                            width: 0,
                            value: RawValue::Infeasible { reason },
                        },
                        batch: Vec::new(),
                        counts: Vec::new(),
                    })
                }
            };
            let mut batch = Vec::new();
            if options.collect_batch {
                for exec in &prepared.executions {
                    batch.push(BatchEntry {
                        vector: exec.key.vector,
                        circuit: exec.key.circuit,
                        role: exec.role,
                        text: exec.circuit.to_text(),
                    });
                }
            }
            let mut counts = Vec::new();
            if options.collect_counts {
                for exec in &prepared.executions {
                    let mut rng = stream::derive(
                        plan.master_seed,
                        &[0xe8ec, exec.key.vector as u64, exec.key.circuit as u64],
                    );
                    let c = backend.execute(exec.key, &exec.circuit, plan.shots, &mut rng)?;
                    counts.push(((exec.key.vector, exec.key.circuit), c));
                }
            }
            let raw = bench::execute_prepared(&prepared, plan, backend)?;
            Ok(JobResult { raw, batch, counts })
        })
        .collect();
    let results = results?;

    let mut raw = Vec::with_capacity(results.len());
    let mut batch = Vec::new();
    let mut counts = BTreeMap::new();
    for r in results {
        raw.push(r.raw);
        batch.extend(r.batch);
        counts.extend(r.counts);
    }
    let (records, infeasible) = bench::finalize(design, plan, &raw)?;
    batch.sort_by_key(|e| (e.vector, e.circuit, matches!(e.role, CircuitRole::SpamReference)));
    Ok(RunOutput {
        records,
        infeasible,
        batch: options.collect_batch.then_some(batch),
        counts: options.collect_counts.then_some(counts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fmb_core::circuit::ConnectivityGraph;
    use fmb_core::design::{grid_design, FeatureAxis, FeatureSpace, Scale};
    use fmb_core::estimate::EstimatorKind;
    use fmb_core::sampler::QubitChoice;
    use fmb_core::sim::NoiselessBackend;

    fn design() -> DesignPlan {
        let space = FeatureSpace::new(vec![
            FeatureAxis::new("w", Scale::Log2, 2.0, 4.0, true).unwrap(),
            FeatureAxis::new("d", Scale::Log2, 4.0, 8.0, true).unwrap(),
        ])
        .unwrap();
        grid_design(&space, &[vec![2.0, 4.0], vec![4.0, 8.0]], |_| false, 3, 0).unwrap()
    }

    #[test]
    fn parallel_run_matches_sequential_reference() {
        let design = design();
        let plan = RunPlan {
            family: fmb_core::bench::CircuitFamily::Mirror,
            estimator: EstimatorKind::SuccessProb,
            shots: 256,
            master_seed: 12,
            connectivity: ConnectivityGraph::line(4),
            qubit_choice: QubitChoice::FirstW,
            default_xi: 0.25,
        };
        let options = RunOptions {
            collect_batch: true,
            collect_counts: true,
        };
        let par = run_parallel(&design, &plan, &NoiselessBackend, &options).unwrap();
        let (seq_records, seq_infeasible) =
            fmb_core::bench::run_benchmark(&design, &plan, &NoiselessBackend).unwrap();
        assert_eq!(par.records, seq_records);
        assert_eq!(par.infeasible, seq_infeasible);
        // batch holds one circuit per job
        assert_eq!(par.batch.as_ref().unwrap().len(), 12);
        assert_eq!(par.counts.as_ref().unwrap().len(), 12);
        // counts are full histograms
        for c in par.counts.as_ref().unwrap().values() {
            assert_eq!(c.total(), 256);
        }
    }
}
