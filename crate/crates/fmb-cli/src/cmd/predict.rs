//! `fmb predict`: evaluates a fitted model at feature vectors or on a
//! heatmap grid.

use fmb_core::analysis::continuous_volumetric_grid;

use crate::manifest::{record_stage, StageRecord};
use crate::{formats, UsageError};

use super::PredictArgs;

/// Parses `name:min:max:count`.
fn parse_grid_spec(spec: &str) -> Result<(String, f64, f64, usize), UsageError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(UsageError(format!(
            "grid `{}`: expected name:min:max:count",
            spec
        )));
    }
    let min: f64 = parts[1]
        .parse()
        .map_err(|_| UsageError(format!("grid `{}`: bad min", spec)))?;
    let max: f64 = parts[2]
        .parse()
        .map_err(|_| UsageError(format!("grid `{}`: bad max", spec)))?;
    let count: usize = parts[3]
        .parse()
        .map_err(|_| UsageError(format!("grid `{}`: bad count", spec)))?;
    if count == 0 || max < min {
        return Err(UsageError(format!("grid `{}`: empty grid", spec)));
    }
    Ok((parts[0].to_string(), min, max, count))
}

fn parse_fix(spec: &str) -> Result<(String, f64), UsageError> {
    let (name, value) = spec
        .split_once('=')
        .ok_or_else(|| UsageError(format!("fix `{}`: expected name=value", spec)))?;
    let value: f64 = value
        .parse()
        .map_err(|_| UsageError(format!("fix `{}`: bad value", spec)))?;
    Ok((name.to_string(), value))
}

pub fn exec(args: &PredictArgs) -> anyhow::Result<()> {
    let model_file = formats::read_model(&args.model)?;
    let axis_names: Vec<String> = model_file
        .space
        .axes()
        .iter()
        .map(|a| a.name.clone())
        .collect();

    if let Some(design_path) = &args.at {
        let design = formats::read_design(design_path)?;
        let (means, vars) = model_file.model.predict(&design.vectors)?;
        formats::write_predictions(&args.output, &axis_names, &design.vectors, &means, &vars)?;
    } else {
        if args.grid.len() != 2 {
            return Err(UsageError(
                "predict needs either --at <design> or two --grid specs".into(),
            )
            .into());
        }
        let (x_name, x_min, x_max, x_count) = parse_grid_spec(&args.grid[0])?;
        let (y_name, y_min, y_max, y_count) = parse_grid_spec(&args.grid[1])?;
        let fixed: Result<Vec<(String, f64)>, UsageError> =
            args.fixed.iter().map(|s| parse_fix(s)).collect();
        // clamp the requested ranges onto the model's axes by overriding the
        // space bounds for grid generation
        let mut space_axes = model_file.space.axes().to_vec();
        for axis in space_axes.iter_mut() {
            if axis.name == x_name {
                axis.min = x_min;
                axis.max = x_max;
            } else if axis.name == y_name {
                axis.min = y_min;
                axis.max = y_max;
            }
        }
        let space = fmb_core::design::FeatureSpace::new(space_axes)
            .map_err(|e| UsageError(format!("{}", e)))?;
        let grid = continuous_volumetric_grid(
            &model_file.model,
            &space,
            &x_name,
            &y_name,
            &fixed?,
            (x_count, y_count),
        )?;
        formats::write_heatmap(&args.output, &grid)?;
    }
    eprintln!("predict: -> {}", args.output.display());
    record_stage(
        args.manifest.as_deref(),
        "predict",
        StageRecord {
            command: "predict".into(),
            inputs: vec![args.model.clone()],
            outputs: vec![args.output.clone()],
            seed: None,
            backend: None,
            estimator: None,
            timestamp: 0,
        },
    )?;
    Ok(())
}
