//! `fmb design`: builds and writes a design file.

use anyhow::Context;

use fmb_core::design::{grid_design, sobol_design, FeatureAxis, FeatureSpace, Scale};

use crate::manifest::{record_stage, StageRecord};
use crate::{formats, UsageError};

use super::{DesignArgs, MethodArg};

/// Parses `name:scale:kind:min:max`.
pub fn parse_axis(spec: &str) -> Result<FeatureAxis, UsageError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 5 {
        return Err(UsageError(format!(
            "axis `{}`: expected name:scale:kind:min:max",
            spec
        )));
    }
    let scale = match parts[1] {
        "linear" => Scale::Linear,
        "log2" => Scale::Log2,
        other => return Err(UsageError(format!("axis `{}`: unknown scale `{}`", spec, other))),
    };
    let integer = match parts[2] {
        "int" => true,
        "real" => false,
        other => return Err(UsageError(format!("axis `{}`: unknown kind `{}`", spec, other))),
    };
    let min: f64 = parts[3]
        .parse()
        .map_err(|_| UsageError(format!("axis `{}`: bad min `{}`", spec, parts[3])))?;
    let max: f64 = parts[4]
        .parse()
        .map_err(|_| UsageError(format!("axis `{}`: bad max `{}`", spec, parts[4])))?;
    FeatureAxis::new(parts[0], scale, min, max, integer)
        .map_err(|e| UsageError(format!("axis `{}`: {}", spec, e)))
}

/// Parses `name=v1,v2,...` or `name=a..b` into explicit grid values.
fn parse_values(spec: &str) -> Result<(String, Vec<f64>), UsageError> {
    let (name, body) = spec
        .split_once('=')
        .ok_or_else(|| UsageError(format!("values `{}`: expected name=...", spec)))?;
    if let Some((a, b)) = body.split_once("..") {
        let lo: i64 = a
            .parse()
            .map_err(|_| UsageError(format!("values `{}`: bad range start", spec)))?;
        let hi: i64 = b
            .parse()
            .map_err(|_| UsageError(format!("values `{}`: bad range end", spec)))?;
        if hi < lo {
            return Err(UsageError(format!("values `{}`: empty range", spec)));
        }
        return Ok((name.to_string(), (lo..=hi).map(|v| v as f64).collect()));
    }
    let vals: Result<Vec<f64>, _> = body.split(',').map(str::trim).map(str::parse).collect();
    match vals {
        Ok(v) if !v.is_empty() => Ok((name.to_string(), v)),
        _ => Err(UsageError(format!("values `{}`: bad value list", spec))),
    }
}

/// Default grid values for an axis: powers of two across a log2 axis,
/// consecutive integers across a linear integer axis.
fn default_values(axis: &FeatureAxis) -> Result<Vec<f64>, UsageError> {
    match (axis.scale, axis.integer_valued) {
        (Scale::Log2, _) => {
            let mut v = Vec::new();
            let mut x = 2f64.powi(axis.min.log2().ceil() as i32);
            while x <= axis.max + 1e-9 {
                if x >= axis.min - 1e-9 {
                    v.push(x);
                }
                x *= 2.0;
            }
            Ok(v)
        }
        (Scale::Linear, true) => {
            Ok(((axis.min.ceil() as i64)..=(axis.max.floor() as i64))
                .map(|v| v as f64)
                .collect())
        }
        (Scale::Linear, false) => Err(UsageError(format!(
            "axis `{}` needs explicit --values for a grid design",
            axis.name
        ))),
    }
}

pub fn exec(args: &DesignArgs) -> anyhow::Result<()> {
    let axes: Result<Vec<FeatureAxis>, UsageError> =
        args.axes.iter().map(|s| parse_axis(s)).collect();
    let axes = axes?;
    let space = FeatureSpace::new(axes).map_err(|e| UsageError(format!("{}", e)))?;

    let design = match args.method {
        MethodArg::Grid => {
            let mut per_axis: Vec<Option<Vec<f64>>> = vec![None; space.dimension()];
            for spec in &args.values {
                let (name, values) = parse_values(spec)?;
                let idx = space
                    .axis_index(&name)
                    .ok_or_else(|| UsageError(format!("values for unknown axis `{}`", name)))?;
                per_axis[idx] = Some(values);
            }
            let values: Result<Vec<Vec<f64>>, UsageError> = space
                .axes()
                .iter()
                .zip(per_axis)
                .map(|(axis, explicit)| match explicit {
                    Some(v) => Ok(v),
                    None => default_values(axis),
                })
                .collect();
            let values = values?;
            let (wi, di) = (
                space.axis_index("w").or_else(|| space.axis_index("width")),
                space.axis_index("d").or_else(|| space.axis_index("depth")),
            );
            let max_wd = args.max_wd;
            let exclude = move |v: &[f64]| -> bool {
                match (max_wd, wi, di) {
                    (Some(limit), Some(wi), Some(di)) => v[wi] * v[di] > limit,
                    _ => false,
                }
            };
            grid_design(&space, &values, exclude, args.k, args.seed)
                .context("grid design construction failed")?
        }
        MethodArg::Sobol => sobol_design(&space, args.m, args.k, args.seed)
            .context("sobol design construction failed")?,
    };

    formats::write_design(&args.output, &design)?;
    eprintln!(
        "design: {} vectors x {} circuits -> {}",
        design.m(),
        design.k,
        args.output.display()
    );
    record_stage(
        args.manifest.as_deref(),
        "design",
        StageRecord {
            command: "design".into(),
            inputs: vec![],
            outputs: vec![args.output.clone()],
            seed: Some(args.seed),
            backend: None,
            estimator: None,
            timestamp: 0,
        },
    )?;
    Ok(())
}
