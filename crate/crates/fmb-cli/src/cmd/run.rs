//! `fmb run`: samples circuits for a design, executes them on the chosen
//! backend, and writes the results file.

use anyhow::{bail, Context};

use fmb_core::bench::{CircuitFamily, RunPlan};
use fmb_core::circuit::ConnectivityGraph;
use fmb_core::estimate::EstimatorKind;
use fmb_core::sampler::QubitChoice;
use fmb_core::sim::{NoiselessBackend, NoisyBackend};

use crate::calibration::ingest_calibration;
use crate::manifest::{record_stage, StageRecord};
use crate::replay::ReplayBackend;
use crate::runner::{run_parallel, RunOptions, RunOutput};
use crate::{formats, UsageError};

use super::{BackendArg, ConnectivityArg, EstimatorArg, FamilyArg, RunArgs};

pub fn exec(args: &RunArgs) -> anyhow::Result<()> {
    let design = formats::read_design(&args.design)?;

    let estimator = match args.estimator {
        EstimatorArg::SuccessProb => EstimatorKind::SuccessProb,
        EstimatorArg::Srdfe => EstimatorKind::Srdfe,
    };
    let family = match (args.family, estimator) {
        (Some(FamilyArg::Mirror), _) => CircuitFamily::Mirror,
        (Some(FamilyArg::FixedDensity), _) => CircuitFamily::FixedDensity,
        (None, EstimatorKind::SuccessProb) => CircuitFamily::Mirror,
        (None, EstimatorKind::Srdfe) => CircuitFamily::FixedDensity,
    };

    // widest circuit the design can ask for
    let max_width = (0..design.m())
        .map(|i| fmb_core::bench::vector_params(&design, i, args.xi).map(|p| p.w))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .max()
        .unwrap_or(2);

    let mut noise = None;
    let connectivity = match args.backend {
        BackendArg::Noisy => {
            let cal_path = args
                .calibration
                .as_ref()
                .ok_or_else(|| UsageError("noisy backend requires --calibration".into()))?;
            let (_, model) = ingest_calibration(cal_path)
                .with_context(|| format!("ingesting {}", cal_path.display()))?;
            let graph = model.connectivity();
            noise = Some(model);
            graph
        }
        BackendArg::Noiseless | BackendArg::Replay => {
            let kind = args.connectivity.unwrap_or(match family {
                CircuitFamily::Mirror => ConnectivityArg::Line,
                CircuitFamily::FixedDensity => ConnectivityArg::Full,
            });
            match kind {
                ConnectivityArg::Line => ConnectivityGraph::line(max_width),
                ConnectivityArg::Full => ConnectivityGraph::all_to_all(max_width),
            }
        }
    };

    let plan = RunPlan {
        family,
        estimator,
        shots: args.shots,
        master_seed: args.seed,
        connectivity,
        qubit_choice: QubitChoice::FirstW,
        default_xi: args.xi,
    };

    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok(); // second initialization in one process keeps the first pool
    }

    let options = RunOptions {
        collect_batch: args.emit_batch.is_some(),
        collect_counts: args.emit_counts.is_some(),
    };
    let output: RunOutput = match args.backend {
        BackendArg::Noiseless => run_parallel(&design, &plan, &NoiselessBackend, &options)?,
        BackendArg::Noisy => {
            let backend = NoisyBackend::new(noise.expect("noise model loaded"));
            run_parallel(&design, &plan, &backend, &options)?
        }
        BackendArg::Replay => {
            let counts_path = args
                .counts
                .as_ref()
                .ok_or_else(|| UsageError("replay backend requires --counts".into()))?;
            let backend = ReplayBackend::from_file(counts_path)?;
            run_parallel(&design, &plan, &backend, &options)?
        }
    };

    for (spec, reason) in &output.infeasible {
        eprintln!(
            "warning: vector {} circuit {} skipped: {}",
            spec.vector, spec.circuit, reason
        );
    }
    if args.strict && !output.infeasible.is_empty() {
        bail!(
            "{} infeasible records under --strict",
            output.infeasible.len()
        );
    }

    let infeasible_entries: Vec<formats::InfeasibleEntry> = output
        .infeasible
        .iter()
        .map(|(spec, _)| formats::InfeasibleEntry {
            vector: spec.vector,
            circuit: spec.circuit,
        })
        .collect();
    formats::write_results(&args.output, &output.records, &infeasible_entries)?;

    let mut outputs = vec![args.output.clone()];
    if let (Some(path), Some(batch)) = (&args.emit_batch, &output.batch) {
        formats::write_batch(
            path,
            &args.design.display().to_string(),
            args.seed,
            batch,
        )?;
        outputs.push(path.clone());
    }
    if let (Some(path), Some(counts)) = (&args.emit_counts, &output.counts) {
        formats::write_counts(path, counts)?;
        outputs.push(path.clone());
    }

    eprintln!(
        "run: {} records ({} infeasible) -> {}",
        output.records.len(),
        output.infeasible.len(),
        args.output.display()
    );
    record_stage(
        args.manifest.as_deref(),
        "run",
        StageRecord {
            command: "run".into(),
            inputs: vec![args.design.clone()],
            outputs,
            seed: Some(args.seed),
            backend: Some(
                match args.backend {
                    BackendArg::Noiseless => "noiseless",
                    BackendArg::Noisy => "noisy",
                    BackendArg::Replay => "replay",
                }
                .into(),
            ),
            estimator: Some(
                match estimator {
                    EstimatorKind::SuccessProb => "success_prob",
                    EstimatorKind::Srdfe => "srdfe",
                }
                .into(),
            ),
            timestamp: 0,
        },
    )?;
    Ok(())
}
