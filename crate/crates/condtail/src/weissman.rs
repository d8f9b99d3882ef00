//! Extrapolation to quantile orders beyond the sample.
//!
//! The inverted survival estimator can never exceed the largest response in
//! the ball B(x, h), so quantiles at levels β far below 1/(effective sample
//! size) need a model step: for a heavy tail, q(β|x) ≈ q(α|x)·(α/β)^γ(x).
//! Plugging the kernel quantile estimate at a moderate anchor level α and a
//! tail-index estimate γ̂(x) into that identity gives the extrapolated
//! estimate
//!
//! q̂(β|x) = q̂(α|x) · (α/β)^γ̂(x).
//!
//! The multiplier (α/β)^γ̂ is reported alongside the value: it is the lever
//! arm of the extrapolation, and errors in γ̂ enter the result through its
//! logarithm log(α/β).

use crate::core::covariate::Covariate;
use crate::core::dataset::Dataset;
use crate::core::kernel::KernelPair;
use crate::core::params::{Bandwidths, TauGrid};
use crate::error::{Error, Result};
use crate::quantile::quantile_estimate;
use crate::tailindex::{tail_index, TailFunctional};

/// An extrapolated quantile with the quantities that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolatedQuantile {
    /// The extrapolated quantile q̂(β|x).
    pub value: f64,
    /// The anchor level α the within-sample estimate was taken at.
    pub anchor_level: f64,
    /// The target level β ≤ α.
    pub target_level: f64,
    /// The tail index the extrapolation used.
    pub gamma_used: f64,
    /// (α/β)^γ̂, the multiplier applied to the anchor quantile.
    pub extrapolation_factor: f64,
}

fn check_levels(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && 0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidLevel { alpha, max: 1.0 });
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidLevel { alpha: beta, max: alpha });
    }
    if beta > alpha {
        return Err(Error::InvalidExtrapolation { alpha, beta });
    }
    Ok(())
}

/// Extrapolate a known anchor quantile from level α out to level β ≤ α.
pub fn weissman_quantile(
    anchor_q: f64,
    alpha: f64,
    beta: f64,
    gamma_hat: f64,
) -> Result<ExtrapolatedQuantile> {
    check_levels(alpha, beta)?;
    if !(anchor_q.is_finite() && anchor_q > 0.0) {
        return Err(Error::InvalidAnchor { anchor: anchor_q });
    }
    if !gamma_hat.is_finite() {
        return Err(Error::invalid_input(format!(
            "the extrapolation needs a finite tail index, got {gamma_hat}"
        )));
    }
    let factor = (alpha / beta).powf(gamma_hat);
    Ok(ExtrapolatedQuantile {
        value: anchor_q * factor,
        anchor_level: alpha,
        target_level: beta,
        gamma_used: gamma_hat,
        extrapolation_factor: factor,
    })
}

/// Estimate q(β|x) by anchoring at q̂(α|x) and extrapolating with the
/// tail index estimated on `grid` by `phi`.
pub fn extrapolate(
    ds: &Dataset,
    kernels: KernelPair,
    bw: Bandwidths,
    x: &Covariate,
    alpha: f64,
    beta: f64,
    grid: &TauGrid,
    phi: &dyn TailFunctional,
) -> Result<ExtrapolatedQuantile> {
    check_levels(alpha, beta)?;
    let index = tail_index(ds, kernels, bw, x, alpha, grid, phi)?;
    let anchor = quantile_estimate(ds, kernels, bw, x, alpha)?;
    weissman_quantile(anchor.value, alpha, beta, index.gamma_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::covariate::Metric;
    use crate::core::kernel::{KernelK, KernelQ};
    use crate::tailindex::Hill;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn hand_computed_extrapolation() {
        let e = weissman_quantile(10.0, 0.1, 0.001, 0.5).unwrap();
        assert!((e.value - 100.0).abs() <= 1e-9, "10·(100)^0.5 = 100, got {}", e.value);
        assert!((e.extrapolation_factor - 10.0).abs() <= 1e-10);
        assert_eq!(e.anchor_level, 0.1);
        assert_eq!(e.target_level, 0.001);
        assert_eq!(e.gamma_used, 0.5);
    }

    #[test]
    fn equal_levels_return_the_anchor() {
        let e = weissman_quantile(7.25, 0.05, 0.05, 1.3).unwrap();
        assert_eq!(e.value, 7.25);
        assert_eq!(e.extrapolation_factor, 1.0);
    }

    #[test]
    fn invalid_inputs_are_rejected_by_kind() {
        let err = weissman_quantile(10.0, 0.05, 0.1, 0.5).unwrap_err();
        assert!(
            matches!(err, Error::InvalidExtrapolation { alpha, beta } if alpha == 0.05 && beta == 0.1),
            "got {err}"
        );
        let err = weissman_quantile(-1.0, 0.1, 0.01, 0.5).unwrap_err();
        assert!(matches!(err, Error::InvalidAnchor { anchor } if anchor == -1.0), "got {err}");
        assert!(matches!(
            weissman_quantile(0.0, 0.1, 0.01, 0.5),
            Err(Error::InvalidAnchor { .. })
        ));
        assert!(matches!(
            weissman_quantile(10.0, 1.2, 0.01, 0.5),
            Err(Error::InvalidLevel { .. })
        ));
        assert!(matches!(
            weissman_quantile(10.0, 0.1, 0.0, 0.5),
            Err(Error::InvalidLevel { .. })
        ));
        assert!(weissman_quantile(10.0, 0.1, 0.01, f64::NAN).is_err());
    }

    #[test]
    fn exact_pareto_composition_is_exact() {
        // With the true index and the true anchor quantile, the
        // extrapolation identity is algebraically exact for a pure power
        // tail: alpha^{-gamma}·(alpha/beta)^gamma = beta^{-gamma}.
        let mut rng = StdRng::seed_from_u64(31337);
        for _ in 0..500 {
            let gamma: f64 = rng.gen_range(0.1..3.0);
            let alpha: f64 = rng.gen_range(0.01..0.5);
            let beta = alpha * rng.gen_range(1e-6..1.0f64);
            let anchor = alpha.powf(-gamma);
            let e = weissman_quantile(anchor, alpha, beta, gamma).unwrap();
            let truth = beta.powf(-gamma);
            assert!(
                ((e.value - truth) / truth).abs() <= 1e-12,
                "gamma={gamma}, alpha={alpha}, beta={beta}: {} vs {truth}",
                e.value
            );
        }
    }

    #[test]
    fn extrapolate_composes_the_estimators_on_pareto_data() {
        let gamma = 0.5;
        let mut rng = StdRng::seed_from_u64(60601);
        let n = 10000;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            xs.push(Covariate::Scalar(rng.gen_range(0.0..1.0)));
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            ys.push(u.powf(-gamma));
        }
        let ds = Dataset::new(xs, ys, Metric::AbsoluteDifference).unwrap();
        let kernels = KernelPair { k: KernelK::Uniform, q: KernelQ::Biweight };
        let bw = Bandwidths::new(0.1, 0.01).unwrap();
        let x = Covariate::Scalar(0.5);
        let grid = TauGrid::reciprocal(9).unwrap();
        let alpha = 0.05;
        let beta = 0.0005;

        let e = extrapolate(&ds, kernels, bw, &x, alpha, beta, &grid, &Hill).unwrap();
        let truth = beta.powf(-gamma);
        assert!(
            (0.5..=2.0).contains(&(e.value / truth)),
            "extrapolated {} vs true {truth}; factor {}",
            e.value,
            e.extrapolation_factor
        );
        // beta = alpha degenerates to the plain quantile estimate.
        let same = extrapolate(&ds, kernels, bw, &x, alpha, alpha, &grid, &Hill).unwrap();
        let plain = quantile_estimate(&ds, kernels, bw, &x, alpha).unwrap();
        assert_eq!(same.value, plain.value);
        // beta > alpha fails before any estimation work.
        let err =
            extrapolate(&ds, kernels, bw, &x, alpha, 2.0 * alpha, &grid, &Hill).unwrap_err();
        assert!(matches!(err, Error::InvalidExtrapolation { .. }), "got {err}");
    }
}
