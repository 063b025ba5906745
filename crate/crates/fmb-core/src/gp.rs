//! Gaussian-process regression with the squared-exponential kernel.
//!
//! Covariance: k(x, x') = eta^2 exp(-1/2 sum_d rho_d^-2 (x_d - x'_d)^2),
//! with observation noise sigma^2 on the diagonal. Hyperparameters are fit
//! by maximizing the log-marginal likelihood with multi-start Nelder-Mead in
//! log-parameter space.
//!
//! Inputs are standardized per axis before fitting (log2 applied first to
//! log2-scaled axes), and targets are mean-centered; both transforms are
//! stored in the model and undone at prediction time.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::FeatureSpace;
use crate::linalg::{Cholesky, LinalgError, Matrix};
use crate::stream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("input dimensions disagree")]
    DimensionMismatch,
    #[error("need at least two training points")]
    TooFewPoints,
    #[error("derivative dimension {0} out of range for {1} dimensions")]
    BadDimension(usize, usize),
    #[error("every optimizer restart failed factorization")]
    AllRestartsFailed,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Squared-exponential kernel hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Signal standard deviation.
    pub eta: f64,
    /// Per-dimension length scales.
    pub rho: Vec<f64>,
    /// Observation-noise standard deviation.
    pub sigma: f64,
}

impl KernelParams {
    pub fn dim(&self) -> usize {
        self.rho.len()
    }
}

/// k(x, x') for the squared-exponential kernel.
pub fn kernel(x: &[f64], x2: &[f64], p: &KernelParams) -> Result<f64, GpError> {
    if x.len() != x2.len() || x.len() != p.dim() {
        return Err(GpError::DimensionMismatch);
    }
    Ok(kernel_unchecked(x, x2, p))
}

#[inline]
fn kernel_unchecked(x: &[f64], x2: &[f64], p: &KernelParams) -> f64 {
    let mut s = 0.0;
    for d in 0..x.len() {
        let diff = (x[d] - x2[d]) / p.rho[d];
        s += diff * diff;
    }
    p.eta * p.eta * libm::exp(-0.5 * s)
}

/// Cov(df(x)/dx_g, f(x')) = -k(x, x') rho_g^-2 (x_g - x'_g).
pub fn kernel_d1(x: &[f64], x2: &[f64], g: usize, p: &KernelParams) -> Result<f64, GpError> {
    if g >= p.dim() {
        return Err(GpError::BadDimension(g, p.dim()));
    }
    let k = kernel(x, x2, p)?;
    Ok(-k * (x[g] - x2[g]) / (p.rho[g] * p.rho[g]))
}

/// Cov(df(x)/dx_g, df(x')/dx'_h)
///   = k(x, x') rho_g^-2 (delta_gh - rho_h^-2 (x_g - x'_g)(x_h - x'_h)).
pub fn kernel_d2(
    x: &[f64],
    x2: &[f64],
    g: usize,
    h: usize,
    p: &KernelParams,
) -> Result<f64, GpError> {
    if g >= p.dim() || h >= p.dim() {
        return Err(GpError::BadDimension(g.max(h), p.dim()));
    }
    let k = kernel(x, x2, p)?;
    let rg2 = p.rho[g] * p.rho[g];
    let rh2 = p.rho[h] * p.rho[h];
    let delta = if g == h { 1.0 } else { 0.0 };
    Ok(k / rg2 * (delta - (x[g] - x2[g]) * (x[h] - x2[h]) / rh2))
}

/// Per-axis input transform: optional log2 followed by standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    log2_axes: Vec<bool>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    /// Builds the transform from the feature space's axis scales and the
    /// training inputs.
    pub fn from_training(space: &FeatureSpace, x: &[Vec<f64>]) -> Standardizer {
        let log2_axes: Vec<bool> = space
            .axes()
            .iter()
            .map(|a| a.scale == crate::design::Scale::Log2)
            .collect();
        Standardizer::from_log_flags(log2_axes, x)
    }

    /// Identity transform in d dimensions (used by tests and raw fits).
    pub fn identity(d: usize) -> Standardizer {
        Standardizer {
            log2_axes: vec![false; d],
            means: vec![0.0; d],
            stds: vec![1.0; d],
        }
    }

    fn from_log_flags(log2_axes: Vec<bool>, x: &[Vec<f64>]) -> Standardizer {
        let d = log2_axes.len();
        let n = x.len().max(1) as f64;
        let mut means = vec![0.0; d];
        let mut stds = vec![0.0; d];
        for row in x {
            for (j, &flag) in log2_axes.iter().enumerate() {
                means[j] += apply_log(row[j], flag);
            }
        }
        for m in means.iter_mut() {
            *m /= n;
        }
        for row in x {
            for (j, &flag) in log2_axes.iter().enumerate() {
                let v = apply_log(row[j], flag) - means[j];
                stds[j] += v * v;
            }
        }
        for s in stds.iter_mut() {
            *s = libm::sqrt(*s / n);
            if *s < 1e-12 {
                *s = 1.0; // constant axis: leave it centered
            }
        }
        Standardizer {
            log2_axes,
            means,
            stds,
        }
    }

    pub fn dim(&self) -> usize {
        self.log2_axes.len()
    }

    pub fn transform(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(j, &x)| (apply_log(x, self.log2_axes[j]) - self.means[j]) / self.stds[j])
            .collect()
    }

    pub fn transform_all(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|v| self.transform(v)).collect()
    }
}

fn apply_log(v: f64, flag: bool) -> f64 {
    if flag {
        libm::log2(v)
    } else {
        v
    }
}

/// A fitted GP model. Inputs and targets are stored in transformed space;
/// predictions undo the transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub params: KernelParams,
    pub standardizer: Standardizer,
    /// Standardized training inputs.
    pub x: Vec<Vec<f64>>,
    /// Centered training targets.
    pub y: Vec<f64>,
    pub y_mean: f64,
}

fn kernel_matrix(x: &[Vec<f64>], p: &KernelParams) -> Matrix {
    let n = x.len();
    Matrix::from_fn(n, n, |i, j| {
        let mut v = kernel_unchecked(&x[i], &x[j], p);
        if i == j {
            v += p.sigma * p.sigma;
        }
        v
    })
}

/// Log-marginal likelihood of centered targets under the kernel:
/// -1/2 y^T (K + sigma^2 I)^-1 y - 1/2 log|K + sigma^2 I| - (N/2) log 2 pi.
pub fn log_marginal_likelihood(
    params: &KernelParams,
    x: &[Vec<f64>],
    y: &[f64],
) -> Result<f64, GpError> {
    if x.len() != y.len() {
        return Err(GpError::DimensionMismatch);
    }
    let n = x.len();
    let k = kernel_matrix(x, params);
    let chol = Cholesky::new(&k)?;
    let alpha = chol.solve(y);
    let data_fit = -0.5 * y.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
    let complexity = -0.5 * chol.log_det();
    let norm = -(n as f64 / 2.0) * libm::log(2.0 * core::f64::consts::PI);
    Ok(data_fit + complexity + norm)
}

/// One optimizer restart's outcome, kept for reproducibility records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    pub params: Option<KernelParams>,
    pub log_ml: Option<f64>,
}

/// Multi-start fit outcome: the selected model plus the restart log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub seed: u64,
    pub restarts: Vec<RestartRecord>,
    pub selected: usize,
}

/// Fit configuration: number of restarts and the optimizer seed.
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for FitConfig {
    fn default() -> FitConfig {
        FitConfig {
            restarts: 10,
            seed: 0,
            max_iters: 400,
        }
    }
}

// log-space hyperparameter bounds (standardized inputs, centered targets)
const LN_ETA_BOUNDS: (f64, f64) = (-6.907755278982137, 2.302585092994046); // [1e-3, 10]
const LN_RHO_BOUNDS: (f64, f64) = (-3.506557897319982, 3.912023005428146); // [0.03, 50]
const LN_SIGMA_BOUNDS: (f64, f64) = (-9.210340371976182, 0.0); // [1e-4, 1]

fn theta_bounds(d: usize) -> Vec<(f64, f64)> {
    let mut b = Vec::with_capacity(d + 2);
    b.push(LN_ETA_BOUNDS);
    for _ in 0..d {
        b.push(LN_RHO_BOUNDS);
    }
    b.push(LN_SIGMA_BOUNDS);
    b
}

fn theta_to_params(theta: &[f64], d: usize) -> KernelParams {
    KernelParams {
        eta: libm::exp(theta[0]),
        rho: theta[1..=d].iter().map(|&t| libm::exp(t)).collect(),
        sigma: libm::exp(theta[d + 1]),
    }
}

impl GpModel {
    /// Fits a GP to raw feature vectors and targets: standardizes inputs per
    /// the space's axis scales, centers targets, and maximizes the
    /// log-marginal likelihood over `restarts` local searches. Ties are
    /// broken by the lowest restart index.
    pub fn fit(
        space: &FeatureSpace,
        x_raw: &[Vec<f64>],
        y_raw: &[f64],
        config: FitConfig,
    ) -> Result<(GpModel, FitReport), GpError> {
        let standardizer = Standardizer::from_training(space, x_raw);
        GpModel::fit_with_standardizer(standardizer, x_raw, y_raw, config)
    }

    /// Fits on pre-transformed coordinates (identity standardizer).
    pub fn fit_raw(
        x: &[Vec<f64>],
        y: &[f64],
        config: FitConfig,
    ) -> Result<(GpModel, FitReport), GpError> {
        let d = x.first().map_or(0, Vec::len);
        GpModel::fit_with_standardizer(Standardizer::identity(d), x, y, config)
    }

    fn fit_with_standardizer(
        standardizer: Standardizer,
        x_raw: &[Vec<f64>],
        y_raw: &[f64],
        config: FitConfig,
    ) -> Result<(GpModel, FitReport), GpError> {
        if x_raw.len() != y_raw.len() {
            return Err(GpError::DimensionMismatch);
        }
        if x_raw.len() < 2 {
            return Err(GpError::TooFewPoints);
        }
        let x = standardizer.transform_all(x_raw);
        let d = standardizer.dim();
        let y_mean = y_raw.iter().sum::<f64>() / y_raw.len() as f64;
        let y: Vec<f64> = y_raw.iter().map(|v| v - y_mean).collect();
        let y_sd = libm::sqrt(y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64).max(1e-3);

        let bounds = theta_bounds(d);
        let objective = |theta: &[f64]| -> f64 {
            let mut penalty = 0.0;
            let mut clamped = theta.to_vec();
            for (t, &(lo, hi)) in clamped.iter_mut().zip(&bounds) {
                let c = t.clamp(lo, hi);
                penalty += 1e4 * (*t - c).abs();
                *t = c;
            }
            let params = theta_to_params(&clamped, d);
            match log_marginal_likelihood(&params, &x, &y) {
                Ok(lml) => -lml + penalty,
                Err(_) => f64::INFINITY,
            }
        };

        let mut report = FitReport {
            seed: config.seed,
            restarts: Vec::with_capacity(config.restarts),
            selected: 0,
        };
        let mut best: Option<(f64, Vec<f64>, usize)> = None;
        for r in 0..config.restarts.max(1) {
            let start = if r == 0 {
                // heuristic start: signal at the target spread, unit length
                // scales in standardized space, modest noise
                let mut t = vec![libm::log(y_sd)];
                t.extend(vec![0.0; d]);
                t.push(libm::log(0.1 * y_sd.max(1e-2)));
                clamp_theta(&mut t, &bounds);
                t
            } else {
                let mut rng = stream::derive(config.seed, &[0x6f70, r as u64]);
                bounds
                    .iter()
                    .map(|&(lo, hi)| {
                        use rand::Rng;
                        rng.random_range(lo..hi)
                    })
                    .collect()
            };
            let (theta, value) = nelder_mead(&objective, &start, config.max_iters);
            if value.is_finite() {
                let mut clamped = theta.clone();
                clamp_theta(&mut clamped, &bounds);
                let params = theta_to_params(&clamped, d);
                let lml = log_marginal_likelihood(&params, &x, &y).ok();
                report.restarts.push(RestartRecord {
                    index: r,
                    params: Some(params),
                    log_ml: lml,
                });
                if best.as_ref().is_none_or(|(bv, _, _)| value < *bv) {
                    best = Some((value, clamped, r));
                }
            } else {
                report.restarts.push(RestartRecord {
                    index: r,
                    params: None,
                    log_ml: None,
                });
            }
        }
        let (_, theta, selected) = best.ok_or(GpError::AllRestartsFailed)?;
        report.selected = selected;
        let params = theta_to_params(&theta, d);
        Ok((
            GpModel {
                params,
                standardizer,
                x,
                y,
                y_mean,
            },
            report,
        ))
    }

    /// Builds a model with fixed hyperparameters (no optimization).
    pub fn with_params(
        params: KernelParams,
        standardizer: Standardizer,
        x_raw: &[Vec<f64>],
        y_raw: &[f64],
    ) -> Result<GpModel, GpError> {
        if x_raw.len() != y_raw.len() || x_raw.is_empty() {
            return Err(GpError::DimensionMismatch);
        }
        let x = standardizer.transform_all(x_raw);
        let y_mean = y_raw.iter().sum::<f64>() / y_raw.len() as f64;
        let y = y_raw.iter().map(|v| v - y_mean).collect();
        Ok(GpModel {
            params,
            standardizer,
            x,
            y,
            y_mean,
        })
    }

    /// Posterior mean and variance at raw feature vectors.
    pub fn predict(&self, x_star_raw: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), GpError> {
        let x_star = self.standardizer.transform_all(x_star_raw);
        self.predict_standardized(&x_star)
    }

    /// Posterior mean and variance at standardized inputs.
    pub fn predict_standardized(
        &self,
        x_star: &[Vec<f64>],
    ) -> Result<(Vec<f64>, Vec<f64>), GpError> {
        let d = self.params.dim();
        for xs in x_star {
            if xs.len() != d {
                return Err(GpError::DimensionMismatch);
            }
        }
        let k = kernel_matrix(&self.x, &self.params);
        let chol = Cholesky::new(&k)?;
        let alpha = chol.solve(&self.y);
        let prior_var = self.params.eta * self.params.eta;
        let mut means = Vec::with_capacity(x_star.len());
        let mut vars = Vec::with_capacity(x_star.len());
        for xs in x_star {
            let k_star: Vec<f64> = self
                .x
                .iter()
                .map(|xi| kernel_unchecked(xs, xi, &self.params))
                .collect();
            let mean = k_star.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
            let v = chol.forward(&k_star);
            let var = prior_var - v.iter().map(|t| t * t).sum::<f64>();
            means.push(mean + self.y_mean);
            vars.push(var.max(0.0));
        }
        Ok((means, vars))
    }

    /// Log-marginal likelihood of the stored training data.
    pub fn log_ml(&self) -> Result<f64, GpError> {
        log_marginal_likelihood(&self.params, &self.x, &self.y)
    }
}

fn clamp_theta(theta: &mut [f64], bounds: &[(f64, f64)]) {
    for (t, &(lo, hi)) in theta.iter_mut().zip(bounds) {
        *t = t.clamp(lo, hi);
    }
}

/// Derivative-free Nelder-Mead minimizer; returns the best vertex.
fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += 0.3;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iters {
        // order ascending by value
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal));
        let simplex_sorted: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let values_sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = simplex_sorted;
        values = values_sorted;

        let spread = values[n] - values[0];
        if spread.abs() < 1e-9 * (1.0 + values[0].abs()) {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_r = f(&reflect);
        if f_r < values[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let f_e = f(&expand);
            if f_e < f_r {
                simplex[n] = expand;
                values[n] = f_e;
            } else {
                simplex[n] = reflect;
                values[n] = f_r;
            }
        } else if f_r < values[n - 1] {
            simplex[n] = reflect;
            values[n] = f_r;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            let f_c = f(&contract);
            if f_c < values[n] {
                simplex[n] = contract;
                values[n] = f_c;
            } else {
                // shrink towards the best vertex
                let best = simplex[0].clone();
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = best[j] + 0.5 * (simplex[i][j] - best[j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best])
}
