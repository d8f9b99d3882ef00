//! Estimation parameters: window widths and level grids.

use crate::error::{Error, Result};

/// Window widths: `h` for covariate smoothing, `lambda` for response
/// smoothing. `lambda = 0` degenerates the smoothed exceedance to the hard
/// indicator `1{Y_i >= y}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidths {
    h: f64,
    lambda: f64,
}

impl Bandwidths {
    pub fn new(h: f64, lambda: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid_input(format!(
                "covariate bandwidth h must be positive and finite, got {h}"
            )));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid_input(format!(
                "response bandwidth lambda must be nonnegative and finite, got {lambda}"
            )));
        }
        Ok(Bandwidths { h, lambda })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// A strictly decreasing grid of positive level multipliers
/// tau_1 > tau_2 > ... > tau_J > 0. Quantiles are estimated at the levels
/// tau_j * alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct TauGrid {
    taus: Vec<f64>,
}

impl TauGrid {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::invalid_input("level grid must be non-empty"));
        }
        for &t in &taus {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid_input(format!(
                    "level multipliers must be positive and finite, got {t}"
                )));
            }
        }
        for w in taus.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::invalid_input(format!(
                    "level multipliers must be strictly decreasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(TauGrid { taus })
    }

    /// The grid tau_j = 1/j for j = 1..=j_max.
    pub fn reciprocal(j_max: usize) -> Result<Self> {
        if j_max == 0 {
            return Err(Error::invalid_input("reciprocal grid needs at least one level"));
        }
        TauGrid::new((1..=j_max).map(|j| 1.0 / j as f64).collect())
    }

    /// The fixed three-level grid (4, 2, 1) used by the Pickands-type
    /// estimator.
    pub fn pickands() -> Self {
        TauGrid { taus: vec![4.0, 2.0, 1.0] }
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty grids
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// The estimation levels tau_j * alpha.
    pub fn levels(&self, alpha: f64) -> Vec<f64> {
        self.taus.iter().map(|t| t * alpha).collect()
    }

    /// The reference vector v with v_j = log(1/tau_j).
    pub fn log_inverse(&self) -> Vec<f64> {
        self.taus.iter().map(|t| (1.0 / t).ln()).collect()
    }
}
