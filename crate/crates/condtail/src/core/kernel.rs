//! Covariate and response smoothing kernels.
//!
//! `KernelK` weights sample points by scaled distance t = d(x, X_i)/h. Its
//! support is [0, 1] and it is pinched between two positive constants
//! C1 <= K(t) <= C2, so every point inside the ball contributes
//! non-vanishing weight and the weight sum tracks the neighborhood size.
//!
//! `KernelQ` smooths responses: a symmetric probability density on [-1, 1]
//! whose antiderivative Q (a cdf) replaces the hard exceedance indicator
//! 1{Y_i >= y} with the smoothed value Q((Y_i - y)/lambda).

/// Covariate kernel on [0, 1], bounded between positive constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelK {
    /// K(t) = 1 on [0, 1]; C1 = C2 = 1.
    Uniform,
    /// K(t) = 1.5 - t on [0, 1], which integrates to one as written;
    /// C1 = 0.5, C2 = 1.5. Offered to exercise non-constant weighting.
    BoundedLinear,
}

impl KernelK {
    /// Kernel value at scaled distance `t`; zero outside [0, 1].
    pub fn eval(&self, t: f64) -> f64 {
        if !(0.0..=1.0).contains(&t) {
            return 0.0;
        }
        match self {
            KernelK::Uniform => 1.0,
            KernelK::BoundedLinear => 1.5 - t,
        }
    }

    /// Lower bound C1 > 0 of the kernel on its support.
    pub fn lower_bound(&self) -> f64 {
        match self {
            KernelK::Uniform => 1.0,
            KernelK::BoundedLinear => 0.5,
        }
    }

    /// Upper bound C2 of the kernel on its support.
    pub fn upper_bound(&self) -> f64 {
        match self {
            KernelK::Uniform => 1.0,
            KernelK::BoundedLinear => 1.5,
        }
    }
}

/// Response kernel: a probability density on [-1, 1] with closed-form cdf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelQ {
    /// q(s) = (15/16)(1 - s^2)^2 on [-1, 1].
    Biweight,
    /// q(s) = 1 - |s| on [-1, 1].
    Triangular,
    /// q(s) = 1/2 on [-1, 1].
    Uniform,
}

impl KernelQ {
    /// Density value at `s`; zero outside [-1, 1].
    pub fn density(&self, s: f64) -> f64 {
        if !(-1.0..=1.0).contains(&s) {
            return 0.0;
        }
        match self {
            KernelQ::Biweight => {
                let w = 1.0 - s * s;
                15.0 / 16.0 * w * w
            }
            KernelQ::Triangular => 1.0 - s.abs(),
            KernelQ::Uniform => 0.5,
        }
    }

    /// Cdf Q(t) = integral of the density up to `t`; clamps to 0 below -1
    /// and 1 above 1.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self {
            KernelQ::Biweight => 0.5 + 15.0 / 16.0 * (t - 2.0 * t.powi(3) / 3.0 + t.powi(5) / 5.0),
            KernelQ::Triangular => {
                if t < 0.0 {
                    let w = 1.0 + t;
                    0.5 * w * w
                } else {
                    let w = 1.0 - t;
                    1.0 - 0.5 * w * w
                }
            }
            KernelQ::Uniform => 0.5 * (t + 1.0),
        }
    }
}

/// The covariate/response kernel pair used throughout estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelPair {
    pub k: KernelK,
    pub q: KernelQ,
}

impl Default for KernelPair {
    /// Uniform covariate weighting with biweight response smoothing.
    fn default() -> Self {
        KernelPair { k: KernelK::Uniform, q: KernelQ::Biweight }
    }
}
