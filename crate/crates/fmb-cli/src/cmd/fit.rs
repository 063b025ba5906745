//! `fmb fit`: assembles the capability dataset and fits GP capability
//! models, optionally running the repeated-random-split evaluation protocol.

use anyhow::Context;

use fmb_core::analysis::{
    assemble_dataset_partial, delta_abs, evaluate_splits, split, AnalysisError, CapabilityDataset,
    CapabilityModel,
};
use fmb_core::gp::{FitConfig, FitReport, GpModel};
use fmb_core::monotonic::{ep_fit, place_virtual_points, EpConfig, MonotonicGpModel};

use crate::manifest::{record_stage, StageRecord};
use crate::{formats, UsageError};

use super::FitArgs;

fn fit_config(args: &FitArgs) -> FitConfig {
    FitConfig {
        restarts: args.restarts,
        seed: args.seed,
        max_iters: 400,
    }
}

/// Fits the requested variant on (x, y) and predicts at `test`.
fn fit_and_predict(
    dataset: &CapabilityDataset,
    args: &FitArgs,
    x: &[Vec<f64>],
    y: &[f64],
    test: &[Vec<f64>],
) -> Result<Vec<f64>, AnalysisError> {
    let (gp, _) = GpModel::fit(&dataset.space, x, y, fit_config(args))?;
    if !args.monotonic {
        return Ok(gp.predict(test)?.0);
    }
    let model = fit_monotonic(dataset, args, x, &gp)?;
    let (means, _) = if args.force {
        model.predict_forced(test)?
    } else {
        model.predict(test)?
    };
    Ok(means)
}

/// Builds the monotonic variant on top of a fitted regular GP: capability
/// surfaces default to decreasing in every feature.
fn fit_monotonic(
    dataset: &CapabilityDataset,
    args: &FitArgs,
    x: &[Vec<f64>],
    gp: &GpModel,
) -> Result<MonotonicGpModel, AnalysisError> {
    let signs = vec![-1i8; dataset.space.dimension()];
    let vp = place_virtual_points(&gp.standardizer, x, args.virtual_points, &signs)?;
    let model = ep_fit(gp, vp, args.nu, EpConfig::default())?;
    if !model.sites.converged && !args.force {
        eprintln!(
            "EP trace: {} sweeps, {} skipped updates",
            model.sites.sweeps, model.sites.skipped_updates
        );
        return Err(fmb_core::monotonic::MonotonicError::NotConverged.into());
    }
    Ok(model)
}

/// Fits the model variant selected by the flags, optionally re-optimizing
/// the monotonic hyperparameters by the EP marginal-likelihood
/// approximation over the regular fit's restart candidates.
fn fit_model(
    dataset: &CapabilityDataset,
    args: &FitArgs,
    x: &[Vec<f64>],
    y: &[f64],
) -> anyhow::Result<(CapabilityModel, FitReport)> {
    let (gp, report) = GpModel::fit(&dataset.space, x, y, fit_config(args))?;
    if !args.monotonic {
        return Ok((CapabilityModel::Regular(gp), report));
    }
    if !args.reoptimize {
        let model = fit_monotonic(dataset, args, x, &gp)?;
        return Ok((CapabilityModel::Monotonic(model), report));
    }
    // re-optimization: score each successful restart's hyperparameters by
    // log Z_EP and keep the best converged candidate
    let signs = vec![-1i8; dataset.space.dimension()];
    let mut best: Option<(f64, MonotonicGpModel)> = None;
    for restart in &report.restarts {
        let Some(params) = &restart.params else { continue };
        let candidate = GpModel::with_params(params.clone(), gp.standardizer.clone(), x, y)?;
        let vp = place_virtual_points(&candidate.standardizer, x, args.virtual_points, &signs)?;
        let Ok(model) = ep_fit(&candidate, vp, args.nu, EpConfig::default()) else {
            continue;
        };
        if !model.sites.converged {
            continue;
        }
        let Ok(score) = model.log_z_ep() else { continue };
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, model));
        }
    }
    match best {
        Some((_, model)) => Ok((CapabilityModel::Monotonic(model), report)),
        None => {
            let model = fit_monotonic(dataset, args, x, &gp)?;
            Ok((CapabilityModel::Monotonic(model), report))
        }
    }
}

pub fn exec(args: &FitArgs) -> anyhow::Result<()> {
    let design = formats::read_design(&args.design)?;
    let (records, infeasible) = formats::read_results(&args.results)?;
    if !infeasible.is_empty() {
        eprintln!(
            "note: {} record-level error entries in results",
            infeasible.len()
        );
    }
    let (dataset, skipped) = assemble_dataset_partial(&design, &records, args.seed)
        .context("assembling capability dataset")?;
    if !skipped.is_empty() {
        eprintln!("note: {} design vectors had no records", skipped.len());
    }

    let vectors = dataset.vectors();
    let means = dataset.means();

    let mut outputs = vec![args.output.clone()];
    // repeated-split protocol
    if args.instances > 1 {
        let fraction = args.train_frac.unwrap_or(0.5);
        let (evals, mean, sd) = evaluate_splits(
            &dataset,
            fraction,
            args.instances,
            args.seed,
            |tx, ty, sx| fit_and_predict(&dataset, args, tx, ty, sx),
        )?;
        println!(
            "delta_abs over {} instances at train fraction {}: mean {:.6}, sd {:.6}",
            args.instances, fraction, mean, sd
        );
        if let Some(path) = &args.summary {
            formats::write_split_summary(path, &evals, mean, sd)?;
            outputs.push(path.clone());
        }
    }

    // the persisted model: trained on the configured fraction (instance 0's
    // split) or on everything
    let (train_x, train_y, test) = match args.train_frac {
        Some(fraction) => {
            let spec = split(dataset.len(), fraction, args.seed)?;
            let tx: Vec<Vec<f64>> = spec.train.iter().map(|&i| vectors[i].clone()).collect();
            let ty: Vec<f64> = spec.train.iter().map(|&i| means[i]).collect();
            let sx: Vec<Vec<f64>> = spec.test.iter().map(|&i| vectors[i].clone()).collect();
            let sy: Vec<f64> = spec.test.iter().map(|&i| means[i]).collect();
            (tx, ty, Some((sx, sy)))
        }
        None => (vectors.clone(), means.clone(), None),
    };
    let (model, report) = fit_model(&dataset, args, &train_x, &train_y)?;
    if let Some((sx, sy)) = test {
        let preds = model.predict(&sx)?.0;
        println!(
            "held-out delta_abs: {:.6} ({} test vectors)",
            delta_abs(&preds, &sy)?,
            sy.len()
        );
    }
    formats::write_model(
        &args.output,
        &formats::ModelFile {
            space: dataset.space.clone(),
            model,
            fit: report,
        },
    )?;
    eprintln!("fit: model -> {}", args.output.display());

    record_stage(
        args.manifest.as_deref(),
        "fit",
        StageRecord {
            command: "fit".into(),
            inputs: vec![args.design.clone(), args.results.clone()],
            outputs,
            seed: Some(args.seed),
            backend: None,
            estimator: None,
            timestamp: 0,
        },
    )?;
    Ok(())
}

/// Shared by predict/report: a friendly wrapper for UsageError construction.
pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}
