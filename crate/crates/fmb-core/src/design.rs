//! Feature spaces and experiment designs.
//!
//! A design selects the M feature vectors v_1..v_M at which circuits will be
//! sampled, either on an explicit grid (Cartesian product minus exclusions)
//! or quasirandomly from a Sobol sequence mapped into the axis ranges.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sobol::{SobolError, SobolSequence};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("axis `{0}`: min must not exceed max")]
    BadRange(String),
    #[error("axis `{0}`: log2 scale requires min > 0")]
    LogScaleRequiresPositive(String),
    #[error("axis names must be unique and the space non-empty")]
    BadSpace,
    #[error("value {value} does not lie on axis `{axis}`")]
    ValueOffAxis { axis: String, value: f64 },
    #[error("grid design is empty after exclusions")]
    EmptyDesign,
    #[error("vector count and circuits-per-vector must be at least 1")]
    BadCount,
    #[error(transparent)]
    Sobol(#[from] SobolError),
}

/// Axis scale: `Log2` axes are explored and modeled in log2 space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log2,
}

/// One named feature axis with its admissible range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAxis {
    pub name: String,
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub integer_valued: bool,
}

impl FeatureAxis {
    pub fn new(
        name: &str,
        scale: Scale,
        min: f64,
        max: f64,
        integer_valued: bool,
    ) -> Result<FeatureAxis, DesignError> {
        if !(min <= max) {
            return Err(DesignError::BadRange(String::from(name)));
        }
        if scale == Scale::Log2 && min <= 0.0 {
            return Err(DesignError::LogScaleRequiresPositive(String::from(name)));
        }
        Ok(FeatureAxis {
            name: String::from(name),
            scale,
            min,
            max,
            integer_valued,
        })
    }

    pub fn contains(&self, value: f64) -> bool {
        let eps = 1e-9 * (1.0 + self.max.abs());
        value >= self.min - eps
            && value <= self.max + eps
            && (!self.integer_valued || value == libm::round(value))
    }

    /// Maps a unit-cube coordinate into the axis range, honoring the scale
    /// and rounding integer axes to the nearest integer (ties up).
    pub fn map_unit(&self, u: f64) -> f64 {
        let raw = match self.scale {
            Scale::Linear => self.min + u * (self.max - self.min),
            Scale::Log2 => {
                let lo = libm::log2(self.min);
                let hi = libm::log2(self.max);
                libm::exp2(lo + u * (hi - lo))
            }
        };
        if self.integer_valued {
            libm::floor(raw + 0.5)
        } else {
            raw
        }
    }

    /// The coordinate in which designs and models operate: log2 of the value
    /// for log2-scaled axes, the raw value otherwise.
    pub fn to_model_space(&self, value: f64) -> f64 {
        match self.scale {
            Scale::Linear => value,
            Scale::Log2 => libm::log2(value),
        }
    }
}

/// An ordered list of feature axes spanning the design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    axes: Vec<FeatureAxis>,
}

impl FeatureSpace {
    pub fn new(axes: Vec<FeatureAxis>) -> Result<FeatureSpace, DesignError> {
        if axes.is_empty() {
            return Err(DesignError::BadSpace);
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(DesignError::BadSpace);
            }
        }
        Ok(FeatureSpace { axes })
    }

    pub fn axes(&self) -> &[FeatureAxis] {
        &self.axes
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMethod {
    Grid,
    Sobol,
}

/// A fully materialized design: the vectors are stored explicitly so that
/// downstream stages never regenerate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPlan {
    pub space: FeatureSpace,
    pub method: DesignMethod,
    pub seed: u64,
    /// Circuits per feature vector.
    pub k: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl DesignPlan {
    pub fn m(&self) -> usize {
        self.vectors.len()
    }

    fn validate(&self) -> Result<(), DesignError> {
        if self.vectors.is_empty() || self.k == 0 {
            return Err(DesignError::BadCount);
        }
        for v in &self.vectors {
            for (axis, &value) in self.space.axes().iter().zip(v.iter()) {
                if !axis.contains(value) {
                    return Err(DesignError::ValueOffAxis {
                        axis: axis.name.clone(),
                        value,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Cartesian-product design over explicit per-axis value lists, minus the
/// points rejected by `exclude`. Vectors come out in lexicographic axis order
/// (first axis slowest). Grid designs contain no duplicate vectors by
/// construction.
pub fn grid_design(
    space: &FeatureSpace,
    values_per_axis: &[Vec<f64>],
    exclude: impl Fn(&[f64]) -> bool,
    k: usize,
    seed: u64,
) -> Result<DesignPlan, DesignError> {
    assert_eq!(values_per_axis.len(), space.dimension());
    for (axis, values) in space.axes().iter().zip(values_per_axis) {
        for &v in values {
            if !axis.contains(v) {
                return Err(DesignError::ValueOffAxis {
                    axis: axis.name.clone(),
                    value: v,
                });
            }
        }
    }
    let mut vectors = Vec::new();
    let mut current = Vec::with_capacity(space.dimension());
    cartesian(values_per_axis, &mut current, &mut vectors, &exclude);
    if vectors.is_empty() {
        return Err(DesignError::EmptyDesign);
    }
    let plan = DesignPlan {
        space: space.clone(),
        method: DesignMethod::Grid,
        seed,
        k,
        vectors,
    };
    plan.validate()?;
    Ok(plan)
}

fn cartesian(
    values_per_axis: &[Vec<f64>],
    current: &mut Vec<f64>,
    out: &mut Vec<Vec<f64>>,
    exclude: &impl Fn(&[f64]) -> bool,
) {
    if current.len() == values_per_axis.len() {
        if !exclude(current) {
            out.push(current.clone());
        }
        return;
    }
    for &v in &values_per_axis[current.len()] {
        current.push(v);
        cartesian(values_per_axis, current, out, exclude);
        current.pop();
    }
}

/// Quasirandom design: M points of the standard Sobol sequence (the all-zeros
/// index-0 point is skipped) mapped into the axis ranges. Duplicate vectors
/// arising from integer rounding are kept; they receive independent circuit
/// samples downstream.
pub fn sobol_design(
    space: &FeatureSpace,
    m: usize,
    k: usize,
    seed: u64,
) -> Result<DesignPlan, DesignError> {
    if m == 0 || k == 0 {
        return Err(DesignError::BadCount);
    }
    let points = SobolSequence::points_skipping_origin(space.dimension(), m)?;
    let vectors = points
        .into_iter()
        .map(|u| {
            space
                .axes()
                .iter()
                .zip(u)
                .map(|(axis, coord)| axis.map_unit(coord))
                .collect()
        })
        .collect();
    let plan = DesignPlan {
        space: space.clone(),
        method: DesignMethod::Sobol,
        seed,
        k,
        vectors,
    };
    plan.validate()?;
    Ok(plan)
}
