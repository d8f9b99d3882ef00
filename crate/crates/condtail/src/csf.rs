//! Kernel estimation of the conditional survival function
//!
//! F̄̂(y|x) = Σᵢ K(d(x,Xᵢ)/h) · Q((Yᵢ−y)/λ) / Σᵢ K(d(x,Xᵢ)/h),
//!
//! where K weights covariates by distance and Q is the integrated response
//! kernel. With λ = 0 the smoothing factor Q degenerates to the indicator
//! 1{Yᵢ ≥ y}. The module also exposes the empirical kernel moment
//! μ̂ₓ^(τ)(h) = (1/n) Σᵢ K^τ(d(x,Xᵢ)/h) and the empirical small-ball
//! fraction used in the normalizations of the quantile estimators.

use crate::core::covariate::Covariate;
use crate::core::dataset::Dataset;
use crate::core::kernel::{KernelK, KernelPair, KernelQ};
use crate::core::params::Bandwidths;
use crate::error::{Error, Result};

/// A conditional survival probability at one (x, y) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsfEstimate {
    /// The estimated survival probability, in [0, 1].
    pub value: f64,
    /// Number of observations with d(x, Xᵢ) ≤ h.
    pub neighborhood_count: usize,
    /// Σᵢ K(d(x,Xᵢ)/h), the denominator of the estimator.
    pub weight_sum: f64,
}

/// The observations inside the ball B(x, h) together with their kernel
/// weights. Points at distance exactly h are included — K's support is
/// treated as the closed interval [0, 1] — so neighborhood counts are
/// reproducible.
#[derive(Debug, Clone)]
pub(crate) struct Neighborhood {
    pub(crate) weights: Vec<f64>,
    pub(crate) responses: Vec<f64>,
    pub(crate) weight_sum: f64,
}

impl Neighborhood {
    pub(crate) fn gather(ds: &Dataset, k: KernelK, h: f64, x: &Covariate) -> Result<Self> {
        let metric = ds.metric();
        let mut weights = Vec::new();
        let mut responses = Vec::new();
        let mut weight_sum = 0.0;
        for (xi, &yi) in ds.covariates().iter().zip(ds.responses()) {
            let w = k.eval(metric.distance(x, xi)? / h);
            if w > 0.0 {
                weights.push(w);
                responses.push(yi);
                weight_sum += w;
            }
        }
        if weights.is_empty() || weight_sum <= 0.0 {
            return Err(Error::EmptyNeighborhood { h });
        }
        Ok(Neighborhood { weights, responses, weight_sum })
    }

    /// The weighted survival estimate at y for response bandwidth lambda.
    pub(crate) fn survival(&self, q: KernelQ, lambda: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for (&w, &yi) in self.weights.iter().zip(&self.responses) {
            acc += w * smoothed_exceedance(q, lambda, yi - y);
        }
        acc / self.weight_sum
    }

    pub(crate) fn min_response(&self) -> f64 {
        self.responses.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn max_response(&self) -> f64 {
        self.responses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn count(&self) -> usize {
        self.weights.len()
    }
}

/// Q((yᵢ − y)/λ), with the λ = 0 limit taken as the indicator 1{yᵢ ≥ y}.
fn smoothed_exceedance(q: KernelQ, lambda: f64, dy: f64) -> f64 {
    if lambda == 0.0 {
        if dy >= 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        q.cdf(dy / lambda)
    }
}

/// Estimate the conditional survival probability P(Y > y | X = x).
///
/// Errors with [`Error::EmptyNeighborhood`] when no observation lies within
/// distance h of x (the denominator would vanish).
pub fn csf_estimate(
    ds: &Dataset,
    kernels: KernelPair,
    bw: Bandwidths,
    x: &Covariate,
    y: f64,
) -> Result<CsfEstimate> {
    let nb = Neighborhood::gather(ds, kernels.k, bw.h(), x)?;
    Ok(CsfEstimate {
        value: nb.survival(kernels.q, bw.lambda(), y),
        neighborhood_count: nb.count(),
        weight_sum: nb.weight_sum,
    })
}

/// Empirical kernel moment μ̂ₓ^(τ)(h) = (1/n) Σᵢ K^τ(d(x,Xᵢ)/h).
///
/// Returns 0 when no observation lies within distance h (the empty sum),
/// rather than an error: the moment is a diagnostic, not an estimate that
/// divides by it.
pub fn kernel_moment(
    ds: &Dataset,
    k: KernelK,
    h: f64,
    x: &Covariate,
    tau_order: f64,
) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid_input(format!("bandwidth h must be positive, got {h}")));
    }
    if !(tau_order.is_finite() && tau_order > 0.0) {
        return Err(Error::invalid_input(format!(
            "moment order must be positive, got {tau_order}"
        )));
    }
    let metric = ds.metric();
    let mut acc = 0.0;
    for xi in ds.covariates() {
        let w = k.eval(metric.distance(x, xi)? / h);
        if w > 0.0 {
            acc += w.powf(tau_order);
        }
    }
    Ok(acc / ds.n() as f64)
}

/// Empirical small-ball fraction: the share of observations with
/// d(x, Xᵢ) ≤ h. Coincides with `kernel_moment` under the uniform K.
pub fn small_ball_estimate(ds: &Dataset, x: &Covariate, h: f64) -> Result<f64> {
    kernel_moment(ds, KernelK::Uniform, h, x, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::covariate::Metric;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn toy() -> Dataset {
        Dataset::new(
            vec![Covariate::Scalar(0.0), Covariate::Scalar(0.1), Covariate::Scalar(0.9)],
            vec![1.0, 3.0, 10.0],
            Metric::AbsoluteDifference,
        )
        .unwrap()
    }

    fn uniform_biweight() -> KernelPair {
        KernelPair { k: KernelK::Uniform, q: KernelQ::Biweight }
    }

    #[test]
    fn toy_survival_is_one_half() {
        // Neighbors of x=0.05 at h=0.2 are X=0.0 (Y=1) and X=0.1 (Y=3); at
        // y=2 with λ=0.1 the smoothing saturates: Q(−10)=0 and Q(10)=1.
        let est = csf_estimate(
            &toy(),
            uniform_biweight(),
            Bandwidths::new(0.2, 0.1).unwrap(),
            &Covariate::Scalar(0.05),
            2.0,
        )
        .unwrap();
        assert_eq!(est.value, 0.5, "hand-computed survival at y=2");
        assert_eq!(est.neighborhood_count, 2);
        assert_eq!(est.weight_sum, 2.0);
    }

    #[test]
    fn survival_saturates_outside_response_range() {
        let ds = toy();
        let bw = Bandwidths::new(0.2, 0.1).unwrap();
        let x = Covariate::Scalar(0.05);
        let below = csf_estimate(&ds, uniform_biweight(), bw, &x, 1.0 - 0.1 - 1e-9).unwrap();
        assert_eq!(below.value, 1.0, "below every neighbor response minus λ");
        let above = csf_estimate(&ds, uniform_biweight(), bw, &x, 3.0 + 0.1 + 1e-9).unwrap();
        assert_eq!(above.value, 0.0, "above every neighbor response plus λ");
    }

    #[test]
    fn empty_neighborhood_is_an_error() {
        let err = csf_estimate(
            &toy(),
            uniform_biweight(),
            Bandwidths::new(0.2, 0.1).unwrap(),
            &Covariate::Scalar(5.0),
            2.0,
        )
        .unwrap_err();
        match err {
            Error::EmptyNeighborhood { h } => assert_eq!(h, 0.2),
            other => panic!("expected EmptyNeighborhood, got {other}"),
        }
    }

    #[test]
    fn point_at_distance_exactly_h_is_included() {
        let ds = Dataset::new(
            vec![Covariate::Scalar(0.25)],
            vec![7.0],
            Metric::AbsoluteDifference,
        )
        .unwrap();
        let est = csf_estimate(
            &ds,
            uniform_biweight(),
            Bandwidths::new(0.2, 0.0).unwrap(),
            &Covariate::Scalar(0.05),
            0.0,
        )
        .unwrap();
        assert_eq!(est.neighborhood_count, 1, "d/h = 1 lies in the closed support");
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn bounded_linear_weights_are_distance_decreasing() {
        let ds = Dataset::new(
            vec![Covariate::Scalar(0.05), Covariate::Scalar(0.15)],
            vec![1.0, 2.0],
            Metric::AbsoluteDifference,
        )
        .unwrap();
        let est = csf_estimate(
            &ds,
            KernelPair { k: KernelK::BoundedLinear, q: KernelQ::Biweight },
            Bandwidths::new(0.2, 0.0).unwrap(),
            &Covariate::Scalar(0.05),
            1.5,
        )
        .unwrap();
        // Weights: K(0) = 1.5 for the first point, K(0.5) = 1.0 for the
        // second; only the second response exceeds y.
        assert_eq!(est.weight_sum, 2.5);
        assert!((est.value - 1.0 / 2.5).abs() <= 1e-15, "got {}", est.value);
    }

    #[test]
    fn survival_is_nonincreasing_in_y_and_in_unit_interval() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(5..60);
            let ds = Dataset::new(
                (0..n).map(|_| Covariate::Scalar(rng.gen_range(0.0..1.0))).collect(),
                (0..n).map(|_| rng.gen_range(-3.0..9.0)).collect(),
                Metric::AbsoluteDifference,
            )
            .unwrap();
            let bw = Bandwidths::new(rng.gen_range(0.1..0.9), rng.gen_range(0.0..0.5)).unwrap();
            let x = Covariate::Scalar(rng.gen_range(0.0..1.0));
            let kernels = if rng.gen_bool(0.5) {
                uniform_biweight()
            } else {
                KernelPair { k: KernelK::BoundedLinear, q: KernelQ::Triangular }
            };
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let y = -4.0 + 14.0 * i as f64 / 100.0;
                match csf_estimate(&ds, kernels, bw, &x, y) {
                    Ok(est) => {
                        assert!(
                            (0.0..=1.0).contains(&est.value),
                            "survival {} outside [0,1]",
                            est.value
                        );
                        assert!(
                            est.value <= prev + 1e-12,
                            "survival rose from {} to {} at y={}",
                            prev,
                            est.value,
                            y
                        );
                        prev = est.value;
                    }
                    Err(Error::EmptyNeighborhood { .. }) => break,
                    Err(other) => panic!("unexpected error {other}"),
                }
            }
        }
    }

    #[test]
    fn smoothing_matches_indicator_away_from_responses() {
        // When no response lies within λ of y, Q saturates at 0 or 1 and the
        // smoothed estimate equals the hard-indicator (λ = 0) estimate.
        let ds = toy();
        let x = Covariate::Scalar(0.05);
        let lambda = 0.25;
        for y in [0.0, 0.5, 1.5, 2.0, 2.5, 3.5, 4.0] {
            let gap = ds.responses().iter().map(|yi| (yi - y).abs()).fold(f64::INFINITY, f64::min);
            assert!(gap > lambda, "test grid must avoid the smoothing windows");
            let smoothed = csf_estimate(
                &ds,
                uniform_biweight(),
                Bandwidths::new(0.2, lambda).unwrap(),
                &x,
                y,
            )
            .unwrap();
            let hard =
                csf_estimate(&ds, uniform_biweight(), Bandwidths::new(0.2, 0.0).unwrap(), &x, y)
                    .unwrap();
            assert_eq!(smoothed.value, hard.value, "mismatch at y={y}");
        }
    }

    #[test]
    fn translation_and_scale_equivariance() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..200 {
            let n = rng.gen_range(3..25);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..6.0)).collect();
            let x = Covariate::Scalar(rng.gen_range(0.0..1.0));
            let h = rng.gen_range(0.2..0.9);
            let lambda = rng.gen_range(0.0..0.4);
            let y = rng.gen_range(-3.0..7.0);
            let shift = rng.gen_range(-5.0..5.0);
            let scale = rng.gen_range(0.1..4.0);

            let make = |ys: Vec<f64>| {
                Dataset::new(
                    xs.iter().map(|&v| Covariate::Scalar(v)).collect(),
                    ys,
                    Metric::AbsoluteDifference,
                )
                .unwrap()
            };
            let base = csf_estimate(
                &make(ys.clone()),
                uniform_biweight(),
                Bandwidths::new(h, lambda).unwrap(),
                &x,
                y,
            )
            .unwrap();
            let shifted = csf_estimate(
                &make(ys.iter().map(|v| v + shift).collect()),
                uniform_biweight(),
                Bandwidths::new(h, lambda).unwrap(),
                &x,
                y + shift,
            )
            .unwrap();
            assert!(
                (base.value - shifted.value).abs() <= 1e-12,
                "translation changed the estimate: {} vs {}",
                base.value,
                shifted.value
            );
            let scaled = csf_estimate(
                &make(ys.iter().map(|v| v * scale).collect()),
                uniform_biweight(),
                Bandwidths::new(h, lambda * scale).unwrap(),
                &x,
                y * scale,
            )
            .unwrap();
            assert!(
                (base.value - scaled.value).abs() <= 1e-12,
                "scaling changed the estimate: {} vs {}",
                base.value,
                scaled.value
            );
        }
    }

    #[test]
    fn kernel_moment_counts_fraction_under_uniform_kernel() {
        // 20 of 100 points fall within h of x; with K ≡ 1 on the ball the
        // moment is the fraction, for every order.
        let xs: Vec<Covariate> =
            (0..100).map(|i| Covariate::Scalar(i as f64 / 100.0)).collect();
        let ds = Dataset::new(xs, vec![1.0; 100], Metric::AbsoluteDifference).unwrap();
        let x = Covariate::Scalar(0.5);
        // |i/100 - 0.5| <= 0.095 picks i = 41..=59 — choose h for 20 points:
        // |i/100 - 0.495| <= 0.0951 picks i = 40..=59.
        let m1 = kernel_moment(&ds, KernelK::Uniform, 0.0951, &Covariate::Scalar(0.495), 1.0)
            .unwrap();
        assert_eq!(m1, 0.2, "20 of 100 points in the ball");
        let m2 = kernel_moment(&ds, KernelK::Uniform, 0.0951, &Covariate::Scalar(0.495), 2.0)
            .unwrap();
        assert_eq!(m2, m1, "K² = K for the uniform kernel");
        let empty = kernel_moment(&ds, KernelK::Uniform, 0.001, &Covariate::Scalar(0.0051), 1.0)
            .unwrap();
        assert_eq!(empty, 0.0, "empty sum, not an error");
        assert!(kernel_moment(&ds, KernelK::Uniform, 0.1, &x, 0.0).is_err());
        assert!(kernel_moment(&ds, KernelK::Uniform, -0.1, &x, 1.0).is_err());
    }

    #[test]
    fn small_ball_fraction_on_toy_data() {
        let ds = toy();
        assert!(
            (small_ball_estimate(&ds, &Covariate::Scalar(0.05), 0.2).unwrap() - 2.0 / 3.0).abs()
                <= 1e-15
        );
        assert_eq!(small_ball_estimate(&ds, &Covariate::Scalar(0.5), 1.0).unwrap(), 1.0);
        assert_eq!(small_ball_estimate(&ds, &Covariate::Scalar(5.0), 0.2).unwrap(), 0.0);
    }
}
