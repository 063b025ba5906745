//! Monotonicity-constrained GP regression via expectation propagation.
//!
//! Derivative-sign constraints are imposed at M virtual points through a
//! probit factor Phi(f' / nu) on the (sign-adjusted) partial derivative at
//! each point. The joint prior couples function values and those derivatives
//! through the squared-exponential derivative covariances; EP approximates
//! each probit factor by an unnormalized Gaussian site, updated by sequential
//! moment matching with damping.
//!
//! Decreasing constraints are realized by negating the derivative rows of
//! the joint covariance, so the probit factor always acts on a quantity that
//! should be non-negative.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gp::{kernel, kernel_d1, kernel_d2, GpError, GpModel, KernelParams, Standardizer};
use crate::linalg::{Cholesky, LinalgError, Matrix};
use crate::sobol::{SobolError, SobolSequence};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonotonicError {
    #[error("virtual point arrays disagree in length")]
    BadVirtualPoints,
    #[error("probit sharpness nu must be positive")]
    BadNu,
    #[error("no constrained dimensions given")]
    NoConstraints,
    #[error("EP diverged at sweep {sweep}: {what}")]
    Diverged { sweep: usize, what: &'static str },
    #[error("EP did not converge; rerun with force to predict anyway")]
    NotConverged,
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sobol(#[from] SobolError),
}

/// Derivative-sign constraint locations: M points (standardized coordinates),
/// each constraining one dimension with an expected sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualPoints {
    pub xm: Vec<Vec<f64>>,
    pub dims: Vec<usize>,
    /// +1: f increasing in the dimension; -1: decreasing.
    pub signs: Vec<i8>,
}

impl VirtualPoints {
    pub fn empty() -> VirtualPoints {
        VirtualPoints {
            xm: Vec::new(),
            dims: Vec::new(),
            signs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.xm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xm.is_empty()
    }

    fn validate(&self, dim: usize) -> Result<(), MonotonicError> {
        if self.xm.len() != self.dims.len() || self.xm.len() != self.signs.len() {
            return Err(MonotonicError::BadVirtualPoints);
        }
        for (p, (&d, &s)) in self.xm.iter().zip(self.dims.iter().zip(&self.signs)) {
            if p.len() != dim || d >= dim || (s != 1 && s != -1) {
                return Err(MonotonicError::BadVirtualPoints);
            }
        }
        Ok(())
    }
}

/// Default placement: a Sobol set over the standardized training box, each
/// point constraining one dimension in round-robin over the dimensions that
/// carry a sign. Signs come from the caller; capability surfaces default to
/// decreasing in every feature.
pub fn place_virtual_points(
    standardizer: &Standardizer,
    x_raw: &[Vec<f64>],
    budget: usize,
    signs_per_dim: &[i8],
) -> Result<VirtualPoints, MonotonicError> {
    let d = standardizer.dim();
    if signs_per_dim.len() != d {
        return Err(MonotonicError::BadVirtualPoints);
    }
    if budget == 0 {
        return Ok(VirtualPoints::empty());
    }
    let constrained: Vec<usize> = (0..d).filter(|&j| signs_per_dim[j] != 0).collect();
    if constrained.is_empty() {
        return Err(MonotonicError::NoConstraints);
    }
    let x = standardizer.transform_all(x_raw);
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in &x {
        for j in 0..d {
            lo[j] = lo[j].min(row[j]);
            hi[j] = hi[j].max(row[j]);
        }
    }
    let points = SobolSequence::points_skipping_origin(d, budget)?;
    let mut vp = VirtualPoints::empty();
    for (k, u) in points.into_iter().enumerate() {
        let p: Vec<f64> = (0..d).map(|j| lo[j] + u[j] * (hi[j] - lo[j])).collect();
        let dim = constrained[k % constrained.len()];
        vp.xm.push(p);
        vp.dims.push(dim);
        vp.signs.push(signs_per_dim[dim]);
    }
    Ok(vp)
}

/// EP site parameters in natural form (precision tau, precision-mean nu),
/// one per virtual point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpSites {
    pub tau: Vec<f64>,
    pub nu: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    pub skipped_updates: usize,
}

impl EpSites {
    /// Site variance sigma~^2_i (infinite while a site is untouched).
    pub fn site_variance(&self, i: usize) -> f64 {
        if self.tau[i] > 0.0 {
            1.0 / self.tau[i]
        } else {
            f64::INFINITY
        }
    }

    /// Site mean mu~_i.
    pub fn site_mean(&self, i: usize) -> f64 {
        if self.tau[i] > 0.0 {
            self.nu[i] / self.tau[i]
        } else {
            0.0
        }
    }
}

/// EP schedule: sequential sweeps in fixed site order.
#[derive(Debug, Clone, Copy)]
pub struct EpConfig {
    pub damping: f64,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for EpConfig {
    fn default() -> EpConfig {
        EpConfig {
            damping: 0.8,
            max_sweeps: 200,
            tol: 1e-6,
        }
    }
}

/// Default probit sharpness.
pub const DEFAULT_NU: f64 = 1e-6;

/// A monotonic GP model: the base GP plus converged EP sites over the
/// virtual derivative constraints. With no virtual points it reproduces the
/// regular GP exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicGpModel {
    pub params: KernelParams,
    pub standardizer: Standardizer,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub y_mean: f64,
    pub virtual_points: VirtualPoints,
    pub probit_nu: f64,
    pub sites: EpSites,
}

/// Joint covariance over [f(x_1..n); s_i df(xm_i)/dx_{d_i}].
fn joint_kernel(
    x: &[Vec<f64>],
    vp: &VirtualPoints,
    p: &KernelParams,
) -> Result<Matrix, GpError> {
    let n = x.len();
    let m = vp.len();
    let mut k = Matrix::zeros(n + m, n + m);
    // observation noise is carried by the diagonal precision blocks, not K
    for i in 0..n {
        for j in i..n {
            let v = kernel(&x[i], &x[j], p)?;
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    for i in 0..n {
        for j in 0..m {
            let v = vp.signs[j] as f64 * kernel_d1(&vp.xm[j], &x[i], vp.dims[j], p)?;
            k.set(i, n + j, v);
            k.set(n + j, i, v);
        }
    }
    for i in 0..m {
        for j in i..m {
            let v = (vp.signs[i] * vp.signs[j]) as f64
                * kernel_d2(&vp.xm[i], &vp.xm[j], vp.dims[i], vp.dims[j], p)?;
            k.set(n + i, n + j, v);
            k.set(n + j, n + i, v);
        }
    }
    Ok(k)
}

/// Posterior over the joint vector given diagonal precisions `d` and natural
/// means `nu_all`: Sigma = K - K sqrt(D) B^-1 sqrt(D) K with
/// B = I + sqrt(D) K sqrt(D); mu = Sigma nu_all.
fn joint_posterior(
    k: &Matrix,
    d: &[f64],
    nu_all: &[f64],
) -> Result<(Matrix, Vec<f64>), LinalgError> {
    let nm = k.rows();
    let s: Vec<f64> = d.iter().map(|&v| libm::sqrt(v)).collect();
    let b = Matrix::from_fn(nm, nm, |i, j| {
        let v = s[i] * k.get(i, j) * s[j];
        if i == j {
            v + 1.0
        } else {
            v
        }
    });
    let chol = Cholesky::new(&b)?;
    // C = sqrt(D) K; Sigma = K - C^T B^-1 C
    let mut binv_c = Matrix::zeros(nm, nm);
    for col in 0..nm {
        let c_col: Vec<f64> = (0..nm).map(|i| s[i] * k.get(i, col)).collect();
        let solved = chol.solve(&c_col);
        for i in 0..nm {
            binv_c.set(i, col, solved[i]);
        }
    }
    let mut sigma = Matrix::zeros(nm, nm);
    for i in 0..nm {
        for j in i..nm {
            let mut v = k.get(i, j);
            for l in 0..nm {
                v -= s[l] * k.get(l, i) * binv_c.get(l, j);
            }
            sigma.set(i, j, v);
            sigma.set(j, i, v);
        }
    }
    let mu = sigma.mul_vec(nu_all);
    Ok((sigma, mu))
}

/// Standard normal pdf / cdf ratio, stable for very negative arguments.
fn pdf_over_cdf(z: f64) -> f64 {
    if z < -30.0 {
        // two-term Mills-ratio asymptotic
        return -z - 1.0 / z;
    }
    let pdf = libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI);
    let cdf = 0.5 * libm::erfc(-z / core::f64::consts::SQRT_2);
    pdf / cdf
}

fn log_phi(z: f64) -> f64 {
    if z < -30.0 {
        // log Phi(z) ~ -z^2/2 - log(-z sqrt(2 pi))
        return -0.5 * z * z - libm::log(-z * libm::sqrt(2.0 * core::f64::consts::PI));
    }
    libm::log(0.5 * libm::erfc(-z / core::f64::consts::SQRT_2))
}

/// Runs EP on the derivative-sign constraints of `base`, reusing its kernel
/// hyperparameters (the controlled-comparison default).
pub fn ep_fit(
    base: &GpModel,
    virtual_points: VirtualPoints,
    probit_nu: f64,
    config: EpConfig,
) -> Result<MonotonicGpModel, MonotonicError> {
    if probit_nu <= 0.0 {
        return Err(MonotonicError::BadNu);
    }
    virtual_points.validate(base.params.dim())?;
    let n = base.x.len();
    let m = virtual_points.len();
    // sites need a strictly positive data-noise block
    let mut params = base.params.clone();
    params.sigma = params.sigma.max(1e-6);

    let k = joint_kernel(&base.x, &virtual_points, &params)?;
    let data_prec = 1.0 / (params.sigma * params.sigma);

    let mut tau = vec![0.0f64; m];
    let mut nu_site = vec![0.0f64; m];
    let mut skipped = 0usize;

    let assemble_d = |tau: &[f64]| -> Vec<f64> {
        let mut d = vec![data_prec; n];
        d.extend_from_slice(tau);
        d
    };
    let assemble_nu = |nu_site: &[f64], y: &[f64]| -> Vec<f64> {
        let mut v: Vec<f64> = y.iter().map(|t| t * data_prec).collect();
        v.extend_from_slice(nu_site);
        v
    };

    let (mut sigma, mut mu) = joint_posterior(&k, &assemble_d(&tau), &assemble_nu(&nu_site, &base.y))?;

    let mut converged = m == 0;
    let mut sweeps = 0usize;
    let nu2 = probit_nu * probit_nu;
    while !converged && sweeps < config.max_sweeps {
        sweeps += 1;
        let mut max_change = 0.0f64;
        for i in 0..m {
            let j = n + i;
            let var_i = sigma.get(j, j);
            if !var_i.is_finite() || var_i <= 0.0 {
                return Err(MonotonicError::Diverged {
                    sweep: sweeps,
                    what: "posterior variance not positive",
                });
            }
            let mean_i = mu[j];
            let tau_cav = 1.0 / var_i - tau[i];
            if tau_cav <= 0.0 {
                // negative cavity precision: skip this update (robust EP)
                skipped += 1;
                continue;
            }
            let v_cav = 1.0 / tau_cav;
            let m_cav = v_cav * (mean_i / var_i - nu_site[i]);

            // probit moment matching for likelihood Phi(u / nu)
            let denom2 = nu2 + v_cav;
            let denom = libm::sqrt(denom2);
            let z = m_cav / denom;
            let dl = pdf_over_cdf(z);
            let m_hat = m_cav + v_cav * dl / denom;
            let v_hat = v_cav - v_cav * v_cav * dl * (z + dl) / denom2;
            if !(v_hat > 0.0) {
                return Err(MonotonicError::Diverged {
                    sweep: sweeps,
                    what: "matched variance collapsed",
                });
            }

            let tau_full = (1.0 / v_hat - tau_cav).max(0.0);
            let nu_full = m_hat / v_hat - m_cav * tau_cav;
            let old_mean = if tau[i] > 0.0 { nu_site[i] / tau[i] } else { 0.0 };
            let tau_new = (1.0 - config.damping) * tau[i] + config.damping * tau_full;
            let nu_new = (1.0 - config.damping) * nu_site[i] + config.damping * nu_full;
            let new_mean = if tau_new > 0.0 { nu_new / tau_new } else { 0.0 };
            max_change = max_change.max((new_mean - old_mean).abs());

            let delta_tau = tau_new - tau[i];
            let delta_nu = nu_new - nu_site[i];
            tau[i] = tau_new;
            nu_site[i] = nu_new;

            // rank-one posterior update
            let denom_r = 1.0 + delta_tau * sigma.get(j, j);
            let col: Vec<f64> = (0..n + m).map(|r| sigma.get(r, j)).collect();
            let mu_scale = (delta_nu - delta_tau * mu[j]) / denom_r;
            for r in 0..n + m {
                mu[r] += mu_scale * col[r];
            }
            let sig_scale = delta_tau / denom_r;
            for r in 0..n + m {
                for c in r..n + m {
                    let v = sigma.get(r, c) - sig_scale * col[r] * col[c];
                    sigma.set(r, c, v);
                    sigma.set(c, r, v);
                }
            }
        }
        // full refresh for numerical hygiene
        let refreshed = joint_posterior(&k, &assemble_d(&tau), &assemble_nu(&nu_site, &base.y))?;
        sigma = refreshed.0;
        mu = refreshed.1;
        if max_change < config.tol {
            converged = true;
        }
    }

    Ok(MonotonicGpModel {
        params,
        standardizer: base.standardizer.clone(),
        x: base.x.clone(),
        y: base.y.clone(),
        y_mean: base.y_mean,
        virtual_points,
        probit_nu,
        sites: EpSites {
            tau,
            nu: nu_site,
            converged,
            sweeps,
            skipped_updates: skipped,
        },
    })
}

impl MonotonicGpModel {
    fn prediction_weights(&self) -> Result<(Vec<f64>, Cholesky, Vec<f64>), MonotonicError> {
        let n = self.x.len();
        let m = self.virtual_points.len();
        let k = joint_kernel(&self.x, &self.virtual_points, &self.params)?;
        let data_prec = 1.0 / (self.params.sigma * self.params.sigma);
        let mut d = vec![data_prec; n];
        d.extend_from_slice(&self.sites.tau);
        let s: Vec<f64> = d.iter().map(|&v| libm::sqrt(v)).collect();
        let nm = n + m;
        let b = Matrix::from_fn(nm, nm, |i, j| {
            let v = s[i] * k.get(i, j) * s[j];
            if i == j {
                v + 1.0
            } else {
                v
            }
        });
        let chol = Cholesky::new(&b)?;
        // u = sqrt(D) mu~_joint: y_i / sigma for data, nu_i / sqrt(tau_i) for sites
        let mut u: Vec<f64> = self
            .y
            .iter()
            .map(|t| t * libm::sqrt(data_prec))
            .collect();
        for i in 0..m {
            let tau = self.sites.tau[i];
            u.push(if tau > 0.0 {
                self.sites.nu[i] / libm::sqrt(tau)
            } else {
                0.0
            });
        }
        // w = sqrt(D) B^-1 u
        let solved = chol.solve(&u);
        let w: Vec<f64> = solved.iter().zip(&s).map(|(v, si)| v * si).collect();
        Ok((w, chol, s))
    }

    fn cross_row(&self, xs: &[f64]) -> Result<Vec<f64>, GpError> {
        let n = self.x.len();
        let m = self.virtual_points.len();
        let mut row = Vec::with_capacity(n + m);
        for xi in &self.x {
            row.push(kernel(xs, xi, &self.params)?);
        }
        for j in 0..m {
            row.push(
                self.virtual_points.signs[j] as f64
                    * kernel_d1(
                        &self.virtual_points.xm[j],
                        xs,
                        self.virtual_points.dims[j],
                        &self.params,
                    )?,
            );
        }
        Ok(row)
    }

    /// Posterior mean and variance at raw feature vectors. Errors when EP
    /// did not converge; use [`MonotonicGpModel::predict_forced`] to predict
    /// from an unconverged model anyway.
    pub fn predict(&self, x_raw: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), MonotonicError> {
        if !self.sites.converged {
            return Err(MonotonicError::NotConverged);
        }
        self.predict_forced(x_raw)
    }

    pub fn predict_forced(
        &self,
        x_raw: &[Vec<f64>],
    ) -> Result<(Vec<f64>, Vec<f64>), MonotonicError> {
        let x_star = self.standardizer.transform_all(x_raw);
        self.predict_standardized(&x_star)
    }

    pub fn predict_standardized(
        &self,
        x_star: &[Vec<f64>],
    ) -> Result<(Vec<f64>, Vec<f64>), MonotonicError> {
        let (w, chol, s) = self.prediction_weights()?;
        let mut means = Vec::with_capacity(x_star.len());
        let mut vars = Vec::with_capacity(x_star.len());
        for xs in x_star {
            let row = self.cross_row(xs)?;
            let mean: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
            let z: Vec<f64> = row.iter().zip(&s).map(|(a, si)| a * si).collect();
            let v = chol.forward(&z);
            let k_ss = kernel(xs, xs, &self.params)?;
            let var = k_ss - v.iter().map(|t| t * t).sum::<f64>();
            means.push(mean + self.y_mean);
            vars.push(var.max(0.0));
        }
        Ok((means, vars))
    }

    /// Posterior means of the sign-adjusted derivatives at the virtual
    /// points (non-negative when the constraints hold).
    pub fn posterior_derivative_means(&self) -> Result<Vec<f64>, MonotonicError> {
        let n = self.x.len();
        let k = joint_kernel(&self.x, &self.virtual_points, &self.params)?;
        let data_prec = 1.0 / (self.params.sigma * self.params.sigma);
        let mut d = vec![data_prec; n];
        d.extend_from_slice(&self.sites.tau);
        let mut nu_all: Vec<f64> = self.y.iter().map(|t| t * data_prec).collect();
        nu_all.extend_from_slice(&self.sites.nu);
        let (_, mu) = joint_posterior(&k, &d, &nu_all)?;
        Ok(mu[n..].to_vec())
    }

    /// EP approximation to the log marginal likelihood, normalized so that
    /// with no virtual points it equals the regular log-marginal likelihood.
    pub fn log_z_ep(&self) -> Result<f64, MonotonicError> {
        let n = self.x.len();
        let m = self.virtual_points.len();
        let k = joint_kernel(&self.x, &self.virtual_points, &self.params)?;
        let sigma2 = self.params.sigma * self.params.sigma;
        let nm = n + m;
        // K + Sigma~ with site variances clamped for the untouched sites
        let site_var: Vec<f64> = (0..m)
            .map(|i| 1.0 / self.sites.tau[i].max(1e-10))
            .collect();
        let a = Matrix::from_fn(nm, nm, |i, j| {
            let mut v = k.get(i, j);
            if i == j {
                v += if i < n { sigma2 } else { site_var[i - n] };
            }
            v
        });
        let chol = Cholesky::new(&a)?;
        let mut mu_joint: Vec<f64> = self.y.clone();
        for i in 0..m {
            mu_joint.push(self.sites.site_mean(i));
        }
        let alpha = chol.solve(&mu_joint);
        let quad: f64 = mu_joint.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let mut log_z = -0.5 * chol.log_det() - 0.5 * quad
            - (n as f64 / 2.0) * libm::log(2.0 * core::f64::consts::PI);

        if m > 0 {
            // cavity terms from the final posterior
            let data_prec = 1.0 / sigma2;
            let mut d = vec![data_prec; n];
            d.extend_from_slice(&self.sites.tau);
            let mut nu_all: Vec<f64> = self.y.iter().map(|t| t * data_prec).collect();
            nu_all.extend_from_slice(&self.sites.nu);
            let (post_sigma, post_mu) = joint_posterior(&k, &d, &nu_all)?;
            let nu2 = self.probit_nu * self.probit_nu;
            for i in 0..m {
                let j = n + i;
                let var_i = post_sigma.get(j, j);
                let tau_cav = (1.0 / var_i - self.sites.tau[i]).max(1e-10);
                let v_cav = 1.0 / tau_cav;
                let m_cav = v_cav * (post_mu[j] / var_i - self.sites.nu[i]);
                let site_mean = self.sites.site_mean(i);
                let site_var_i = site_var[i];
                let diff = m_cav - site_mean;
                log_z += diff * diff / (2.0 * (v_cav + site_var_i));
                log_z += log_phi(m_cav / (self.probit_nu * libm::sqrt(1.0 + v_cav / nu2)));
                log_z += 0.5 * libm::log(v_cav + site_var_i);
            }
        }
        Ok(log_z)
    }
}
