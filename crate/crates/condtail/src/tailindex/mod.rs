//! Conditional tail-index estimation from a path of extreme quantiles.
//!
//! Every estimator in the family shares one shape: given quantile estimates
//! q̂(τ₁α|x), …, q̂(τ_Jα|x) along a decreasing level grid, apply a
//! functional φ to their logarithms and normalize by the same functional of
//! the reference vector v = (log(1/τ₁), …, log(1/τ_J)):
//!
//! γ̂(x) = φ(log q̂(τ₁α|x), …, log q̂(τ_Jα|x)) / φ(v).
//!
//! Any φ that is shift invariant (φ(x + η·1) = φ(x)) and positively
//! homogeneous (φ(θx) = θφ(x)) produces a consistent estimator, because for
//! a heavy tail the log-quantile path is approximately c·1 + γ(x)·v. The
//! asymptotic variance of γ̂ is the quadratic form
//!
//! V = γ² · ∇φ(γv)ᵀ Σ ∇φ(γv) / φ²(v),   Σ_{jk} = 1/τ_{min(j,k)},
//!
//! computed here either from an analytic gradient (where one is known) or
//! from central finite differences. Closed forms are provided for the
//! Hill-type choice φ = m₁ and for the Pickands functional on its fixed
//! grid (4, 2, 1).

pub mod functionals;
pub mod registry;

pub use functionals::{CaeiroGomes, GomesMartins, Hill, Pickands, Segers};
pub use registry::{FunctionalRegistry, PhiParams};

use crate::core::covariate::Covariate;
use crate::core::dataset::Dataset;
use crate::core::kernel::KernelPair;
use crate::core::params::{Bandwidths, TauGrid};
use crate::error::{Error, Result};
use crate::quantile::quantile_path;

/// A functional φ : ℝ^J → ℝ that turns a log-quantile path into a tail
/// index. Implementations must be shift invariant and positively
/// homogeneous; both properties are checked by tests, not by the trait.
pub trait TailFunctional: Send + Sync {
    /// The registry name, e.g. `"hill"`.
    fn name(&self) -> &str;

    /// Evaluate φ(v).
    fn eval(&self, v: &[f64]) -> Result<f64>;

    /// Evaluate ∇φ(v). The default is a central finite difference of
    /// [`eval`](Self::eval); implementations with a known closed form
    /// override it.
    fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        finite_difference_gradient(|u| self.eval(u), v)
    }

    /// Reject level grids the estimator is not defined on.
    fn validate_grid(&self, grid: &TauGrid) -> Result<()>;
}

/// Central finite-difference gradient with step 1e−6·max(1, ‖v‖∞).
pub fn finite_difference_gradient<F>(f: F, v: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let step = 1e-6 * v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut work = v.to_vec();
    let mut grad = Vec::with_capacity(v.len());
    for j in 0..v.len() {
        work[j] = v[j] + step;
        let up = f(&work)?;
        work[j] = v[j] - step;
        let down = f(&work)?;
        work[j] = v[j];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// A conditional tail-index estimate with its plug-in variance.
#[derive(Debug, Clone)]
pub struct TailIndexEstimate {
    /// The estimate γ̂(x). Positive for genuinely heavy tails, but not
    /// enforced: noisy neighborhoods can produce nonpositive values.
    pub gamma_hat: f64,
    /// V(γ̂)/γ̂², the dimensionless variance factor of the estimator; NaN
    /// when γ̂ ≤ 0 (the variance formula needs a positive index).
    pub variance_factor: f64,
    /// The level grid the estimate was computed on.
    pub grid: TauGrid,
    /// The anchor level α.
    pub level: f64,
}

impl TailIndexEstimate {
    /// Plug-in standard error σ̂ₙ·√V = σ̂ₙ·γ̂·√(variance factor).
    pub fn standard_error(&self, sigma_hat: f64) -> f64 {
        sigma_hat * (self.variance_factor * self.gamma_hat * self.gamma_hat).sqrt()
    }
}

/// Apply a functional to an already-computed quantile path.
pub fn tail_index_from_quantiles(
    path: &[f64],
    grid: &TauGrid,
    phi: &dyn TailFunctional,
) -> Result<f64> {
    if path.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} quantiles (one per grid level)", grid.len()),
            found: format!("{}", path.len()),
        });
    }
    let denom = phi.eval(&grid.log_inverse())?;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateGrid {
            message: format!(
                "the {} functional vanishes on the reference grid, so the estimator is 0/0",
                phi.name()
            ),
        });
    }
    let mut logs = Vec::with_capacity(path.len());
    for &q in path {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::invalid_input(format!(
                "quantile path entries must be positive to take logarithms, got {q}"
            )));
        }
        logs.push(q.ln());
    }
    Ok(phi.eval(&logs)? / denom)
}

/// Estimate the conditional tail index γ(x) at anchor level α on the given
/// grid.
pub fn tail_index(
    ds: &Dataset,
    kernels: KernelPair,
    bw: Bandwidths,
    x: &Covariate,
    alpha: f64,
    grid: &TauGrid,
    phi: &dyn TailFunctional,
) -> Result<TailIndexEstimate> {
    phi.validate_grid(grid)?;
    let path = quantile_path(ds, kernels, bw, x, alpha, grid)?;
    let gamma_hat = tail_index_from_quantiles(&path, grid, phi)?;
    let variance_factor = if gamma_hat > 0.0 {
        asymptotic_variance(phi, gamma_hat, grid)? / (gamma_hat * gamma_hat)
    } else {
        f64::NAN
    };
    Ok(TailIndexEstimate { gamma_hat, variance_factor, grid: grid.clone(), level: alpha })
}

fn variance_quadratic_form(
    phi: &dyn TailFunctional,
    gamma: f64,
    grid: &TauGrid,
    force_finite_difference: bool,
) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid_input(format!(
            "the variance formula needs a positive tail index, got {gamma}"
        )));
    }
    phi.validate_grid(grid)?;
    let v = grid.log_inverse();
    let denom = phi.eval(&v)?;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateGrid {
            message: format!(
                "the {} functional vanishes on the reference grid, so the variance is undefined",
                phi.name()
            ),
        });
    }
    let scaled: Vec<f64> = v.iter().map(|x| gamma * x).collect();
    let g = if force_finite_difference {
        finite_difference_gradient(|u| phi.eval(u), &scaled)?
    } else {
        phi.gradient(&scaled)?
    };
    let taus = grid.taus();
    let mut quad = 0.0;
    for (j, &gj) in g.iter().enumerate() {
        for (k, &gk) in g.iter().enumerate() {
            quad += gj * gk / taus[j.min(k)];
        }
    }
    Ok(gamma * gamma * quad / (denom * denom))
}

/// Asymptotic variance V = γ²·∇φ(γv)ᵀΣ∇φ(γv)/φ²(v) of the estimator
/// built on `phi`, using the functional's own gradient (analytic where it
/// has one).
pub fn asymptotic_variance(
    phi: &dyn TailFunctional,
    gamma: f64,
    grid: &TauGrid,
) -> Result<f64> {
    variance_quadratic_form(phi, gamma, grid, false)
}

/// Same quadratic form, with the gradient forced to central finite
/// differences — a cross-check path that never trusts an analytic gradient.
pub fn asymptotic_variance_fd(
    phi: &dyn TailFunctional,
    gamma: f64,
    grid: &TauGrid,
) -> Result<f64> {
    variance_quadratic_form(phi, gamma, grid, true)
}

/// Closed-form variance of the Hill-type estimator (φ = m₁):
/// V_H = γ²·(Σ_j (2(J−j)+1)/τ_j − J²) / (Σ_j log(1/τ_j))².
pub fn variance_hill_closed(gamma: f64, grid: &TauGrid) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid_input(format!(
            "the variance formula needs a positive tail index, got {gamma}"
        )));
    }
    let j_count = grid.len();
    let denom: f64 = grid.log_inverse().iter().sum();
    if denom == 0.0 {
        return Err(Error::DegenerateGrid {
            message: "the log-inverse levels sum to zero, so the Hill denominator vanishes"
                .to_string(),
        });
    }
    let numerator: f64 = grid
        .taus()
        .iter()
        .enumerate()
        .map(|(i, &tau)| (2.0 * (j_count - 1 - i) as f64 + 1.0) / tau)
        .sum::<f64>()
        - (j_count as f64) * (j_count as f64);
    Ok(gamma * gamma * numerator / (denom * denom))
}

/// Closed-form variance of the Pickands-type estimator on its fixed grid
/// (4, 2, 1): V_P = γ²·(2^{2γ+1}+1) / (4·log²2·(2^γ−1)²).
pub fn variance_pickands_closed(gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid_input(format!(
            "the variance formula needs a positive tail index, got {gamma}"
        )));
    }
    let ln2 = std::f64::consts::LN_2;
    let pow = 2.0_f64;
    Ok(gamma * gamma * (pow.powf(2.0 * gamma + 1.0) + 1.0)
        / (4.0 * ln2 * ln2 * (pow.powf(gamma) - 1.0).powi(2)))
}

/// The Hill variance factor V_H/γ² on the reciprocal grids τ_j = 1/j for
/// J = 2..=j_max — the table behind the choice of grid size. The factor is
/// γ-free, so the scan is returned for γ = 1 regardless of `gamma`
/// scaling interests; multiply by γ² for a specific index.
pub fn hill_variance_scan(gamma: f64, j_max: usize) -> Result<Vec<(usize, f64)>> {
    if j_max < 2 {
        return Err(Error::invalid_input(format!(
            "the scan needs at least two levels, got j_max = {j_max}"
        )));
    }
    (2..=j_max)
        .map(|j| Ok((j, variance_hill_closed(gamma, &TauGrid::reciprocal(j)?)?)))
        .collect()
}
