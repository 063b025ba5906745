//! `fmb report`: monotonicity metrics, per-circuit estimate tables, and
//! volumetric summaries from a results file.

use anyhow::Context;

use fmb_core::analysis::{assemble_dataset_partial, delta_v, monotonicity_report};

use crate::manifest::{record_stage, StageRecord};
use crate::{formats, UsageError};

use super::{MetricArg, ReportArgs};

pub fn exec(args: &ReportArgs) -> anyhow::Result<()> {
    let design = formats::read_design(&args.design)?;
    let (records, _) = formats::read_results(&args.results)?;
    let (dataset, skipped) = assemble_dataset_partial(&design, &records, args.seed)
        .context("assembling capability dataset")?;
    if !skipped.is_empty() {
        eprintln!("note: {} design vectors had no records", skipped.len());
    }
    let axis_names: Vec<String> = dataset
        .space
        .axes()
        .iter()
        .map(|a| a.name.clone())
        .collect();

    match args.metric {
        MetricArg::DeltaV => {
            match &args.project {
                Some(drop_name) => {
                    let drop = dataset
                        .space
                        .axis_index(drop_name)
                        .ok_or_else(|| UsageError(format!("unknown axis `{}`", drop_name)))?;
                    let subset: Vec<usize> = (0..dataset.space.dimension())
                        .filter(|&j| j != drop)
                        .collect();
                    let report = delta_v(&dataset, &subset);
                    eprintln!(
                        "delta-v (drop {}): {} entries, {} incomparable",
                        drop_name,
                        report.entries.len(),
                        report.incomparable
                    );
                    formats::write_monotonicity(&args.output, &[&report], &axis_names)?;
                }
                None => {
                    let report = monotonicity_report(&dataset);
                    eprintln!(
                        "delta-v (full): {} entries, {} incomparable",
                        report.full.entries.len(),
                        report.full.incomparable
                    );
                    let mut all = vec![&report.full];
                    all.extend(report.projections.iter());
                    formats::write_monotonicity(&args.output, &all, &axis_names)?;
                }
            };
        }
        MetricArg::Estimates => {
            let mut w = csv::Writer::from_path(&args.output)
                .with_context(|| format!("writing {}", args.output.display()))?;
            let mut header = vec!["vector_index".to_string()];
            header.extend(axis_names.iter().cloned());
            header.extend(["circuit_index".to_string(), "estimate".to_string()]);
            w.write_record(&header)?;
            for s in &dataset.per_vector {
                for (j, est) in s.estimates.iter().enumerate() {
                    let mut row = vec![s.index.to_string()];
                    row.extend(s.vector.iter().map(|v| format!("{}", v)));
                    row.push(j.to_string());
                    row.push(format!("{}", est));
                    w.write_record(&row)?;
                }
            }
            w.flush()?;
        }
        MetricArg::Volumetric => {
            let mut w = csv::Writer::from_path(&args.output)
                .with_context(|| format!("writing {}", args.output.display()))?;
            let mut header = vec!["vector_index".to_string()];
            header.extend(axis_names.iter().cloned());
            header.extend([
                "mean".to_string(),
                "stderr".to_string(),
                "clamped_mean".to_string(),
            ]);
            w.write_record(&header)?;
            for s in &dataset.per_vector {
                let mut row = vec![s.index.to_string()];
                row.extend(s.vector.iter().map(|v| format!("{}", v)));
                row.push(format!("{}", s.mean));
                row.push(format!("{}", s.stderr));
                row.push(format!("{}", s.mean.clamp(0.0, 1.0)));
                w.write_record(&row)?;
            }
            w.flush()?;
        }
    }
    eprintln!("report: -> {}", args.output.display());
    record_stage(
        args.manifest.as_deref(),
        "report",
        StageRecord {
            command: "report".into(),
            inputs: vec![args.design.clone(), args.results.clone()],
            outputs: vec![args.output.clone()],
            seed: Some(args.seed),
            backend: None,
            estimator: None,
            timestamp: 0,
        },
    )?;
    Ok(())
}
