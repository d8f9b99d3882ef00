//! Extreme conditional quantiles by generalized inversion of the survival
//! estimator:
//!
//! q̂(α|x) = inf{ t : F̄̂(t|x) ≤ α },
//!
//! together with the normalization σₙ(x) = (n·μ̂ₓ^(1)(h)·α)^{−1/2} that
//! scales the quantile estimation error, and the rate diagnostics that a
//! practitioner needs to judge whether α, h, λ are in the regime where the
//! normal approximation is trustworthy.
//!
//! The inversion runs a bisection that is steered to the *leftmost* point
//! where the survival estimate drops to α, matching the infimum definition
//! even across flat stretches of the estimator. The bracket
//! [min_neighbor(Y) − λ − 1, max_neighbor(Y) + λ] always contains the
//! crossing because the estimator is 1 at its left end and 0 at its right
//! end (with λ = 0 the right end carries the top atom, whose infimum is the
//! maximum itself). A consequence worth remembering: the inverse can never
//! exceed the largest response in the ball B(x, h), which is why tail
//! extrapolation beyond the sample needs the dedicated multiplier in the
//! `weissman` module rather than ever-smaller α here.

use crate::core::covariate::Covariate;
use crate::core::dataset::Dataset;
use crate::core::kernel::{KernelPair, KernelQ};
use crate::core::params::{Bandwidths, TauGrid};
use crate::csf::{kernel_moment, small_ball_estimate, Neighborhood};
use crate::error::{Error, Result};

/// A conditional quantile estimate at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileEstimate {
    /// The estimated quantile, in response units.
    pub value: f64,
    /// The level α the quantile was requested at.
    pub level: f64,
    /// Plug-in normalization σ̂ₙ(x) = (n·μ̂ₓ^(1)(h)·α)^{−1/2}.
    pub sigma_hat: f64,
    /// Number of observations with d(x, Xᵢ) ≤ h.
    pub neighborhood_count: usize,
}

/// Scale-free products that the asymptotic theory requires to be large
/// (`ball_mass`) or small (the other two) for the estimators to be in their
/// operating regime. The theory prescribes only limits, so these are
/// reported, never enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateDiagnostics {
    /// n·φ̂ₓ(h)·α — the expected number of ball points below level α; the
    /// effective sample size of the tail estimate.
    pub ball_mass: f64,
    /// σ̂ₙ⁻¹·h·|log α| — how much covariate-smoothing bias the normalized
    /// error can hide.
    pub bandwidth_bias: f64,
    /// σ̂ₙ⁻¹·λ/q̂(α|x) — response smoothing relative to the quantile scale.
    pub smoothing_ratio: f64,
}

fn check_level(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && 0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidLevel { alpha, max: 1.0 });
    }
    Ok(())
}

/// Leftmost-steered bisection for inf{ t : survival(t) ≤ alpha } over the
/// canonical bracket. Exposed to the crate so edge cases (degenerate
/// brackets, the λ = 0 atom at the maximum) can be exercised directly.
pub(crate) fn invert_survival(
    nb: &Neighborhood,
    q: KernelQ,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let mut lo = nb.min_response() - lambda - 1.0;
    let mut hi = nb.max_response() + lambda;
    if nb.survival(q, lambda, lo) <= alpha {
        // The whole bracket satisfies the condition; the infimum saturates
        // at the left end. Unreachable for alpha < 1, where survival(lo)=1.
        return lo;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-10 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if nb.survival(q, lambda, mid) <= alpha {
            hi = mid; // keep searching left of the satisfying midpoint
        } else {
            lo = mid;
        }
    }
    // `hi` is the smallest point found to satisfy survival ≤ alpha; with
    // λ = 0 the initial right end may itself carry survival > alpha (the
    // atom at the maximal response), in which case the infimum of the set
    // {t > max Y} is still that right end.
    hi
}

/// Estimate the conditional α-quantile q(α|x) of the response.
pub fn quantile_estimate(
    ds: &Dataset,
    kernels: KernelPair,
    bw: Bandwidths,
    x: &Covariate,
    alpha: f64,
) -> Result<QuantileEstimate> {
    check_level(alpha)?;
    let nb = Neighborhood::gather(ds, kernels.k, bw.h(), x)?;
    let value = invert_survival(&nb, kernels.q, bw.lambda(), alpha);
    Ok(QuantileEstimate {
        value,
        level: alpha,
        sigma_hat: sigma_n(ds, kernels, bw, x, alpha)?,
        neighborhood_count: nb.count(),
    })
}

/// Estimate the quantile at every level τ_j·α of the grid, reusing one
/// neighborhood scan. The grid is decreasing in τ, so the returned sequence
/// is nondecreasing.
pub fn quantile_path(
    ds: &Dataset,
    kernels: KernelPair,
    bw: Bandwidths,
    x: &Covariate,
    alpha: f64,
    grid: &TauGrid,
) -> Result<Vec<f64>> {
    for &tau in grid.taus() {
        check_level(tau * alpha)?;
    }
    let nb = Neighborhood::gather(ds, kernels.k, bw.h(), x)?;
    Ok(grid
        .taus()
        .iter()
        .map(|&tau| invert_survival(&nb, kernels.q, bw.lambda(), tau * alpha))
        .collect())
}

/// The normalization σₙ(x) = (n·μ̂ₓ^(1)(h)·α)^{−1/2} with the empirical
/// kernel moment standing in for the population one.
pub fn sigma_n(
    ds: &Dataset,
    kernels: KernelPair,
    bw: Bandwidths,
    x: &Covariate,
    alpha: f64,
) -> Result<f64> {
    check_level(alpha)?;
    let moment = kernel_moment(ds, kernels.k, bw.h(), x, 1.0)?;
    if moment <= 0.0 {
        return Err(Error::EmptyNeighborhood { h: bw.h() });
    }
    Ok(1.0 / (ds.n() as f64 * moment * alpha).sqrt())
}

/// The three rate products for the estimate at (x, α); see
/// [`RateDiagnostics`].
pub fn rate_diagnostics(
    ds: &Dataset,
    kernels: KernelPair,
    bw: Bandwidths,
    x: &Covariate,
    alpha: f64,
) -> Result<RateDiagnostics> {
    let est = quantile_estimate(ds, kernels, bw, x, alpha)?;
    let ball = small_ball_estimate(ds, x, bw.h())?;
    Ok(RateDiagnostics {
        ball_mass: ds.n() as f64 * ball * alpha,
        bandwidth_bias: bw.h() * alpha.ln().abs() / est.sigma_hat,
        smoothing_ratio: bw.lambda() / (est.sigma_hat * est.value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::covariate::Metric;
    use crate::core::kernel::KernelK;
    use crate::csf::csf_estimate;
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

    /// Exact-Pareto synthetic data: X ~ U(0,1), Y = U^{-gamma} with U
    /// uniform, so q(alpha|x) = alpha^{-gamma} for every x.
    fn pareto_dataset(n: usize, gamma: f64, seed: u64) -> Dataset {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            xs.push(Covariate::Scalar(rng.gen_range(0.0..1.0)));
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            ys.push(u.powf(-gamma));
        }
        Dataset::new(xs, ys, Metric::AbsoluteDifference).unwrap()
    }

    #[test]
    fn toy_median_is_one_plus_lambda() {
        // Neighbors Y = 1, 3 with equal weights; the survival estimate sits
        // at 1/2 + Q((1−t)/λ)/2 until t passes 1 + λ, so the infimum of
        // {t : survival ≤ 0.5} is exactly 1.1. In floating point the
        // biweight smoothing cdf is cubically flat at its endpoint, so the
        // computed survival reaches 1/2 within ~(machine ε)^{1/3}·λ ≈ 6e−7
        // of the analytic root; the tolerance reflects that, not the
        // bisection (which is tight to ~1e−10).
        let est = quantile_estimate(
            &toy(),
            uniform_biweight(),
            Bandwidths::new(0.2, 0.1).unwrap(),
            &Covariate::Scalar(0.05),
            0.5,
        )
        .unwrap();
        assert!((est.value - 1.1).abs() <= 1e-6, "got {}", est.value);
        assert_eq!(est.level, 0.5);
        assert_eq!(est.neighborhood_count, 2);
    }

    #[test]
    fn levels_outside_unit_interval_are_rejected() {
        let ds = toy();
        let bw = Bandwidths::new(0.2, 0.1).unwrap();
        let x = Covariate::Scalar(0.05);
        for bad in [0.0, 1.0, -0.2, 1.7, f64::NAN] {
            let err = quantile_estimate(&ds, uniform_biweight(), bw, &x, bad).unwrap_err();
            assert!(
                matches!(err, Error::InvalidLevel { .. }),
                "alpha={bad} should be an InvalidLevel error, got {err}"
            );
        }
        let err = quantile_estimate(&ds, uniform_biweight(), bw, &Covariate::Scalar(5.0), 0.5)
            .unwrap_err();
        assert!(matches!(err, Error::EmptyNeighborhood { .. }));
    }

    #[test]
    fn whole_bracket_saturation_returns_left_end() {
        let nb = Neighborhood::gather(&toy(), KernelK::Uniform, 0.2, &Covariate::Scalar(0.05))
            .unwrap();
        // alpha ≥ 1 makes every point satisfy survival ≤ alpha; the infimum
        // is the left end of the bracket (min Y − λ − 1 = −0.1).
        let v = invert_survival(&nb, KernelQ::Biweight, 0.1, 1.0);
        assert_eq!(v, 1.0 - 0.1 - 1.0);
    }

    #[test]
    fn hard_indicator_inverse_lands_on_order_statistics() {
        // λ = 0: the estimator is a step function over the neighbor
        // responses {1, 3} with equal weights. survival(t) = 1 for t ≤ 1,
        // = 1/2 on (1, 3], = 0 beyond. inf{survival ≤ 0.6} = 1,
        // inf{survival ≤ 0.4} = 3, and the top atom keeps the infimum at
        // the maximal response even though survival(3) = 1/2 > 0.4 is false
        // — at alpha below the top atom weight the infimum is still 3.
        let ds = toy();
        let bw = Bandwidths::new(0.2, 0.0).unwrap();
        let x = Covariate::Scalar(0.05);
        let q60 = quantile_estimate(&ds, uniform_biweight(), bw, &x, 0.6).unwrap().value;
        assert!((q60 - 1.0).abs() <= 1e-9, "got {q60}");
        let q40 = quantile_estimate(&ds, uniform_biweight(), bw, &x, 0.4).unwrap().value;
        assert!((q40 - 3.0).abs() <= 1e-9, "got {q40}");
        let q10 = quantile_estimate(&ds, uniform_biweight(), bw, &x, 0.1).unwrap().value;
        assert!((q10 - 3.0).abs() <= 1e-9, "the maximum is the infimum at tiny alpha, got {q10}");
    }

    #[test]
    fn monotone_in_alpha_and_consistent_with_csf() {
        let mut rng = StdRng::seed_from_u64(37);
        for _ in 0..15 {
            let n = rng.gen_range(10..80);
            let ds = Dataset::new(
                (0..n).map(|_| Covariate::Scalar(rng.gen_range(0.0..1.0))).collect(),
                (0..n).map(|_| rng.gen_range(0.0..20.0)).collect(),
                Metric::AbsoluteDifference,
            )
            .unwrap();
            let bw = Bandwidths::new(rng.gen_range(0.2..0.8), rng.gen_range(0.01..0.3)).unwrap();
            let x = Covariate::Scalar(rng.gen_range(0.0..1.0));
            let mut prev = f64::INFINITY;
            for i in 1..=50 {
                let alpha = i as f64 / 51.0;
                let est = match quantile_estimate(&ds, uniform_biweight(), bw, &x, alpha) {
                    Ok(e) => e,
                    Err(Error::EmptyNeighborhood { .. }) => break,
                    Err(other) => panic!("unexpected error {other}"),
                };
                assert!(
                    est.value <= prev + 1e-9,
                    "quantile rose from {prev} to {} as alpha rose to {alpha}",
                    est.value
                );
                prev = est.value;
                // The returned point satisfies the defining inequality, and
                // the point a bracketing tolerance to its left does not.
                let at = csf_estimate(&ds, uniform_biweight(), bw, &x, est.value).unwrap().value;
                assert!(at <= alpha + 1e-9, "csf({}) = {at} > alpha = {alpha}", est.value);
                let delta = 1e-6 * est.value.abs().max(1.0);
                let before =
                    csf_estimate(&ds, uniform_biweight(), bw, &x, est.value - delta).unwrap().value;
                assert!(
                    before >= alpha - 1e-9,
                    "csf({}) = {before} < alpha = {alpha}: not the leftmost crossing",
                    est.value - delta
                );
            }
        }
    }

    #[test]
    fn scaling_responses_scales_quantiles() {
        let mut rng = StdRng::seed_from_u64(53);
        for _ in 0..50 {
            let n = rng.gen_range(5..40);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..50.0)).collect();
            let scale = rng.gen_range(0.2..8.0);
            let alpha = rng.gen_range(0.05..0.95);
            let lambda = rng.gen_range(0.0..0.5);
            let x = Covariate::Scalar(rng.gen_range(0.0..1.0));
            let make = |c: f64| {
                Dataset::new(
                    xs.iter().map(|&v| Covariate::Scalar(v)).collect(),
                    ys.iter().map(|&v| c * v).collect(),
                    Metric::AbsoluteDifference,
                )
                .unwrap()
            };
            let base = quantile_estimate(
                &make(1.0),
                uniform_biweight(),
                Bandwidths::new(0.5, lambda).unwrap(),
                &x,
                alpha,
            )
            .unwrap()
            .value;
            let scaled = quantile_estimate(
                &make(scale),
                uniform_biweight(),
                Bandwidths::new(0.5, scale * lambda).unwrap(),
                &x,
                alpha,
            )
            .unwrap()
            .value;
            assert!(
                (scaled - scale * base).abs() <= 1e-6 * scale * base.abs().max(1.0),
                "scaling by {scale} moved {base} to {scaled}"
            );
        }
    }

    #[test]
    fn path_is_nondecreasing_and_degenerates_to_single_estimate() {
        let ds = toy();
        let bw = Bandwidths::new(0.2, 0.1).unwrap();
        let x = Covariate::Scalar(0.05);
        let grid = TauGrid::new(vec![1.0, 0.5]).unwrap();
        let path = quantile_path(&ds, uniform_biweight(), bw, &x, 0.99, &grid).unwrap();
        assert!(path[1] >= path[0] - 1e-9, "smaller level must give larger quantile: {path:?}");

        let single = TauGrid::new(vec![1.0]).unwrap();
        let path1 = quantile_path(&ds, uniform_biweight(), bw, &x, 0.5, &single).unwrap();
        let est = quantile_estimate(&ds, uniform_biweight(), bw, &x, 0.5).unwrap();
        assert_eq!(path1, vec![est.value]);

        // tau * alpha outside (0,1) must be rejected up front.
        let big = TauGrid::new(vec![4.0, 2.0, 1.0]).unwrap();
        let err = quantile_path(&ds, uniform_biweight(), bw, &x, 0.5, &big).unwrap_err();
        assert!(matches!(err, Error::InvalidLevel { .. }), "got {err}");
    }

    #[test]
    fn pareto_quantiles_match_the_oracle() {
        let ds = pareto_dataset(4000, 0.5, 97);
        let bw = Bandwidths::new(0.4, 0.0).unwrap();
        let x = Covariate::Scalar(0.5);
        let est = quantile_estimate(&ds, uniform_biweight(), bw, &x, 0.1).unwrap();
        let oracle = 0.1f64.powf(-0.5);
        assert!(
            (est.value / oracle - 1.0).abs() <= 0.2,
            "estimate {} far from oracle {oracle}",
            est.value
        );

        let ds2 = pareto_dataset(20000, 2.0, 101);
        let grid = TauGrid::new(vec![1.0, 0.5, 0.25]).unwrap();
        let path = quantile_path(
            &ds2,
            uniform_biweight(),
            Bandwidths::new(0.5, 0.0).unwrap(),
            &x,
            0.02,
            &grid,
        )
        .unwrap();
        for (q, level) in path.iter().zip([0.02f64, 0.01, 0.005]) {
            let oracle = level.powf(-2.0);
            assert!(
                (0.5..=2.0).contains(&(q / oracle)),
                "path value {q} at level {level} vs oracle {oracle}"
            );
        }
        assert!(path[0] <= path[1] && path[1] <= path[2], "path must be nondecreasing: {path:?}");
    }

    #[test]
    fn sigma_n_matches_direct_formula() {
        // 50 of 100 points in the ball under the uniform kernel: μ̂ = 0.5;
        // (100·0.5·0.02)^{-1/2} = 1 exactly.
        let make = |n: usize| {
            let xs: Vec<Covariate> = (0..n)
                .map(|i| Covariate::Scalar(if i % 2 == 0 { 0.5 } else { 5.0 }))
                .collect();
            Dataset::new(xs, vec![1.0; n], Metric::AbsoluteDifference).unwrap()
        };
        let bw = Bandwidths::new(0.1, 0.0).unwrap();
        let x = Covariate::Scalar(0.5);
        let s100 = sigma_n(&make(100), uniform_biweight(), bw, &x, 0.02).unwrap();
        assert!((s100 - 1.0).abs() <= 1e-12, "got {s100}");
        let s400 = sigma_n(&make(400), uniform_biweight(), bw, &x, 0.02).unwrap();
        assert!((s400 - 0.5).abs() <= 1e-12, "quadrupling n halves sigma, got {s400}");
        let err =
            sigma_n(&make(100), uniform_biweight(), bw, &Covariate::Scalar(50.0), 0.02)
                .unwrap_err();
        assert!(matches!(err, Error::EmptyNeighborhood { .. }));
    }

    #[test]
    fn rate_diagnostics_are_positive_and_scale_sensibly() {
        let ds = pareto_dataset(2000, 0.5, 7);
        let bw = Bandwidths::new(0.2, 0.05).unwrap();
        let x = Covariate::Scalar(0.5);
        let d = rate_diagnostics(&ds, uniform_biweight(), bw, &x, 0.05).unwrap();
        assert!(d.ball_mass > 0.0 && d.ball_mass.is_finite());
        assert!(d.bandwidth_bias > 0.0 && d.bandwidth_bias.is_finite());
        assert!(d.smoothing_ratio > 0.0 && d.smoothing_ratio.is_finite());
        // Halving alpha shrinks the effective tail sample linearly.
        let d2 = rate_diagnostics(&ds, uniform_biweight(), bw, &x, 0.025).unwrap();
        assert!((d2.ball_mass / d.ball_mass - 0.5).abs() <= 1e-12);
        // λ = 0 zeroes the smoothing share.
        let d0 =
            rate_diagnostics(&ds, uniform_biweight(), Bandwidths::new(0.2, 0.0).unwrap(), &x, 0.05)
                .unwrap();
        assert_eq!(d0.smoothing_ratio, 0.0);
    }
}
