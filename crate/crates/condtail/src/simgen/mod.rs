//! Synthetic data with exact tail oracles.
//!
//! Models live on [1, ∞) and are specified through their conditional
//! survival function
//!
//! F̄(y|x) = c(x) · exp{ −∫₁^y (1/γ(x) − ε(u|x)) du/u },
//!
//! so the tail index γ(x) and the perturbation ε are controlled exactly and
//! every estimator can be scored against closed-form truths:
//!
//! * `exact-pareto`: ε ≡ 0, F̄(y|x) = c(x)·y^{−1/γ(x)}, the pure power law.
//! * `burr`: a second-order family with parameter ρ < 0, fixed through its
//!   quantile function q(α|x) = (2(α/c(x))^ρ − 1)^{−γ(x)/ρ}, equivalently
//!   F̄(y|x) = c(x)·((1 + y^{−ρ/γ(x)})/2)^{1/ρ}. Its perturbation
//!   ε(u|x) = (1/γ(x))/(1 + u^{−ρ/γ(x)}) is regularly varying with index
//!   ρ/γ(x), so |ε| decays like a power of u — the textbook second-order
//!   regime. The factor 2 pins the support floor: F̄(1|x) = c(x) exactly.
//!
//! Sampling is by inverse transform, so draws, survival values, and
//! quantiles are mutually consistent to rounding error. The [`Design`] type
//! adds covariate laws and seeding: every replicate index gets its own
//! counter-mode stream of one seeded generator, making Monte Carlo runs
//! reproducible and parallelizable at the same time.

pub mod montecarlo;

pub use montecarlo::{
    cholesky_psd, monte_carlo, BlockSummary, CsfProbe, DiagnosticsSummary, McConfig, McReport,
};

use std::sync::Arc;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core::covariate::{Covariate, Metric};
use crate::core::dataset::Dataset;
use crate::error::{Error, Result};

/// A function of the covariate, e.g. x ↦ γ(x).
pub type CovariateFn = Arc<dyn Fn(&Covariate) -> f64 + Send + Sync>;

/// The tail family of a synthetic model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailFamily {
    /// Pure power tail; the perturbation ε is identically zero.
    ExactPareto,
    /// Second-order family; ε decays like u^{ρ/γ} with ρ < 0.
    Burr { rho: f64 },
}

/// A conditional heavy-tailed law on [1, ∞) with exact oracles.
#[derive(Clone)]
pub struct TailModel {
    family: TailFamily,
    gamma_fn: CovariateFn,
    c_fn: CovariateFn,
}

impl TailModel {
    pub fn new(family: TailFamily, gamma_fn: CovariateFn, c_fn: CovariateFn) -> Result<Self> {
        if let TailFamily::Burr { rho } = family {
            if !(rho.is_finite() && rho < 0.0) {
                return Err(Error::invalid_input(format!(
                    "the burr family needs a negative second-order parameter rho, got {rho}"
                )));
            }
        }
        Ok(TailModel { family, gamma_fn, c_fn })
    }

    /// Pure power tail with constant index and c ≡ 1.
    pub fn exact_pareto(gamma: f64) -> Result<Self> {
        TailModel::new(
            TailFamily::ExactPareto,
            Arc::new(move |_| gamma),
            Arc::new(|_| 1.0),
        )
    }

    /// Burr tail with constant index, c ≡ 1, and second-order parameter rho.
    pub fn burr(gamma: f64, rho: f64) -> Result<Self> {
        TailModel::new(TailFamily::Burr { rho }, Arc::new(move |_| gamma), Arc::new(|_| 1.0))
    }

    /// Replace the index function, keeping family and scale.
    pub fn with_gamma_fn(mut self, gamma_fn: CovariateFn) -> Self {
        self.gamma_fn = gamma_fn;
        self
    }

    /// Replace the scale function c(x); values must stay in (0, 1].
    pub fn with_c_fn(mut self, c_fn: CovariateFn) -> Self {
        self.c_fn = c_fn;
        self
    }

    pub fn family(&self) -> TailFamily {
        self.family
    }

    /// γ(x), validated positive and finite.
    pub fn gamma_at(&self, x: &Covariate) -> Result<f64> {
        let g = (self.gamma_fn)(x);
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::invalid_input(format!(
                "the tail index function must be positive and finite, got {g}"
            )));
        }
        Ok(g)
    }

    /// c(x), validated in (0, 1] — it is the survival probability at the
    /// support floor y = 1.
    pub fn c_at(&self, x: &Covariate) -> Result<f64> {
        let c = (self.c_fn)(x);
        if !(c.is_finite() && c > 0.0 && c <= 1.0) {
            return Err(Error::invalid_input(format!(
                "the scale function must take values in (0, 1], got {c}"
            )));
        }
        Ok(c)
    }
}

impl std::fmt::Debug for TailModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TailModel").field("family", &self.family).finish_non_exhaustive()
    }
}

/// The exact conditional survival probability P(Y > y | X = x). Arguments
/// below the support floor are clamped: the survival there is c(x).
pub fn true_csf(model: &TailModel, x: &Covariate, y: f64) -> Result<f64> {
    let gamma = model.gamma_at(x)?;
    let c = model.c_at(x)?;
    if !y.is_finite() {
        return Err(Error::invalid_input(format!("survival argument must be finite, got {y}")));
    }
    let y = y.max(1.0);
    Ok(match model.family {
        TailFamily::ExactPareto => c * y.powf(-1.0 / gamma),
        TailFamily::Burr { rho } => c * ((1.0 + y.powf(-rho / gamma)) / 2.0).powf(1.0 / rho),
    })
}

/// The exact conditional quantile q(α|x) = inf{t : F̄(t|x) ≤ α}, defined
/// for 0 < α < c(x); at α ≥ c(x) the quantile would leave the support.
pub fn true_quantile(model: &TailModel, x: &Covariate, alpha: f64) -> Result<f64> {
    let gamma = model.gamma_at(x)?;
    let c = model.c_at(x)?;
    if !(alpha.is_finite() && alpha > 0.0 && alpha < c) {
        return Err(Error::InvalidLevel { alpha, max: c });
    }
    Ok(match model.family {
        TailFamily::ExactPareto => (alpha / c).powf(-gamma),
        TailFamily::Burr { rho } => {
            (2.0 * (alpha / c).powf(rho) - 1.0).powf(-gamma / rho)
        }
    })
}

/// One draw of Y | X = x by inverse transform: U uniform on (0, c(x))
/// mapped through the true quantile function. Every draw lies in [1, ∞).
pub fn sample_conditional<R: Rng + ?Sized>(
    model: &TailModel,
    x: &Covariate,
    rng: &mut R,
) -> Result<f64> {
    let c = model.c_at(x)?;
    let u: f64 = rng.sample(Open01);
    true_quantile(model, x, u * c)
}

/// Numeric evaluation of the perturbation ε(u|x) = 1/γ(x) + dlogF̄/dlogu,
/// by a central difference on the log scale with step 1e−5 (clamped at the
/// support floor). Exact Pareto gives 0 up to differencing error; Burr
/// gives a power-decaying profile.
pub fn epsilon_numeric(model: &TailModel, x: &Covariate, u: f64) -> Result<f64> {
    if !(u.is_finite() && u > 1.0) {
        return Err(Error::invalid_input(format!(
            "the perturbation is probed above the support floor (u > 1), got {u}"
        )));
    }
    let gamma = model.gamma_at(x)?;
    let delta = 1e-5_f64;
    let hi = u * delta.exp();
    let lo = (u * (-delta).exp()).max(1.0);
    let slope =
        (true_csf(model, x, hi)?.ln() - true_csf(model, x, lo)?.ln()) / (hi.ln() - lo.ln());
    Ok(1.0 / gamma + slope)
}

/// How covariates are drawn in a synthetic design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariateLaw {
    /// X uniform on [0, 1].
    UniformScalar,
    /// X uniform on [0, 1]^dim.
    UniformVector { dim: usize },
    /// Random curves t ↦ a + b·t + c·sin(πt) on a uniform grid over [0, 1],
    /// with coefficients uniform on [0, 1).
    RandomCurves { grid_len: usize },
}

impl CovariateLaw {
    /// The default metric matching the covariate shape this law produces.
    pub fn metric(&self) -> Metric {
        match self {
            CovariateLaw::UniformScalar => Metric::AbsoluteDifference,
            CovariateLaw::UniformVector { .. } => Metric::Euclidean,
            CovariateLaw::RandomCurves { grid_len } => {
                Metric::CurveL2 { step: 1.0 / (*grid_len as f64 - 1.0) }
            }
        }
    }

    /// Whether a covariate has the shape this law produces.
    pub fn compatible_with(&self, x: &Covariate) -> bool {
        match (self, x) {
            (CovariateLaw::UniformScalar, Covariate::Scalar(_)) => true,
            (CovariateLaw::UniformVector { dim }, Covariate::Vector(v)) => v.len() == *dim,
            (CovariateLaw::RandomCurves { grid_len }, Covariate::Curve(v)) => {
                v.len() == *grid_len
            }
            _ => false,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Covariate {
        match self {
            CovariateLaw::UniformScalar => Covariate::Scalar(rng.gen_range(0.0..1.0)),
            CovariateLaw::UniformVector { dim } => {
                Covariate::Vector((0..*dim).map(|_| rng.gen_range(0.0..1.0)).collect())
            }
            CovariateLaw::RandomCurves { grid_len } => {
                let (a, b, c): (f64, f64, f64) = (
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                );
                let m = *grid_len;
                Covariate::Curve(
                    (0..m)
                        .map(|k| {
                            let t = k as f64 / (m as f64 - 1.0);
                            a + b * t + c * (std::f64::consts::PI * t).sin()
                        })
                        .collect(),
                )
            }
        }
    }
}

/// A reproducible sampling design: covariate law, sample size, and seed.
/// Replicate r is drawn from stream r of a counter-mode generator seeded
/// once, so replicates are independent, order-free, and deterministic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    law: CovariateLaw,
    n: usize,
    seed: u64,
}

impl Design {
    pub fn new(law: CovariateLaw, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid_input("a design needs at least one observation"));
        }
        match law {
            CovariateLaw::UniformVector { dim } if dim == 0 => {
                return Err(Error::invalid_input("vector covariates need at least one entry"));
            }
            CovariateLaw::RandomCurves { grid_len } if grid_len < 2 => {
                return Err(Error::invalid_input("curves need at least two grid points"));
            }
            _ => {}
        }
        Ok(Design { law, n, seed })
    }

    pub fn law(&self) -> CovariateLaw {
        self.law
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draw replicate `replicate` of the design under `model`.
    pub fn generate_replicate(&self, model: &TailModel, replicate: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate);
        let mut covariates = Vec::with_capacity(self.n);
        let mut responses = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let x = self.law.draw(&mut rng);
            let y = sample_conditional(model, &x, &mut rng)?;
            covariates.push(x);
            responses.push(y);
        }
        Dataset::new(covariates, responses, self.law.metric())
    }

    /// Draw the first replicate.
    pub fn generate(&self, model: &TailModel) -> Result<Dataset> {
        self.generate_replicate(model, 0)
    }
}
