//! Covariate values and the metrics that compare them.
//!
//! A covariate lives in one of three spaces: the real line, a Euclidean
//! space, or the space of curves sampled on a shared uniform grid. A
//! `Metric` measures distance within one of those spaces; applying it
//! across spaces, or across different dimensions within a space, is a
//! dimension mismatch.

use crate::error::{Error, Result};

/// A point in covariate space.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariate {
    /// A point on the real line.
    Scalar(f64),
    /// A point in R^p, p >= 1.
    Vector(Vec<f64>),
    /// A curve sampled on a shared uniform grid with at least two nodes.
    Curve(Vec<f64>),
}

impl Covariate {
    /// Number of coordinates: 1 for scalars, p for vectors, grid length for curves.
    pub fn dim(&self) -> usize {
        match self {
            Covariate::Scalar(_) => 1,
            Covariate::Vector(v) | Covariate::Curve(v) => v.len(),
        }
    }

    /// Shape descriptor used in error messages, e.g. `vector(3)`.
    pub fn shape(&self) -> String {
        match self {
            Covariate::Scalar(_) => "scalar".to_string(),
            Covariate::Vector(v) => format!("vector({})", v.len()),
            Covariate::Curve(v) => format!("curve({})", v.len()),
        }
    }

    /// True when both values live in the same space with the same dimension.
    pub fn same_shape(&self, other: &Covariate) -> bool {
        matches!(
            (self, other),
            (Covariate::Scalar(_), Covariate::Scalar(_))
                | (Covariate::Vector(_), Covariate::Vector(_))
                | (Covariate::Curve(_), Covariate::Curve(_))
        ) && self.dim() == other.dim()
    }

    pub(crate) fn is_finite(&self) -> bool {
        match self {
            Covariate::Scalar(v) => v.is_finite(),
            Covariate::Vector(v) | Covariate::Curve(v) => v.iter().all(|c| c.is_finite()),
        }
    }
}

/// Distance on one of the covariate spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// `|a - b|` on scalars.
    AbsoluteDifference,
    /// Euclidean norm of `a - b` on vectors.
    Euclidean,
    /// Rectangle-rule L2 distance on curves sharing a uniform grid with the
    /// given step: `sqrt(step * sum_k (a_k - b_k)^2)`.
    CurveL2 { step: f64 },
    /// Supremum distance on curves: `max_k |a_k - b_k|`.
    CurveSup,
}

impl Metric {
    /// True when the metric is defined on the covariate's space.
    pub fn accepts(&self, c: &Covariate) -> bool {
        matches!(
            (self, c),
            (Metric::AbsoluteDifference, Covariate::Scalar(_))
                | (Metric::Euclidean, Covariate::Vector(_))
                | (Metric::CurveL2 { .. }, Covariate::Curve(_))
                | (Metric::CurveSup, Covariate::Curve(_))
        )
    }

    pub(crate) fn expected_shape(&self) -> &'static str {
        match self {
            Metric::AbsoluteDifference => "scalar",
            Metric::Euclidean => "vector",
            Metric::CurveL2 { .. } | Metric::CurveSup => "curve",
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let Metric::CurveL2 { step } = self {
            if !(step.is_finite() && *step > 0.0) {
                return Err(Error::invalid_input(format!(
                    "curve grid step must be positive and finite, got {step}"
                )));
            }
        }
        Ok(())
    }

    /// Distance between two covariates of matching shape.
    pub fn distance(&self, a: &Covariate, b: &Covariate) -> Result<f64> {
        self.validate()?;
        if !a.same_shape(b) {
            return Err(Error::DimensionMismatch { expected: a.shape(), found: b.shape() });
        }
        if !self.accepts(a) {
            return Err(Error::DimensionMismatch {
                expected: self.expected_shape().to_string(),
                found: a.shape(),
            });
        }
        let d = match (self, a, b) {
            (Metric::AbsoluteDifference, Covariate::Scalar(u), Covariate::Scalar(v)) => {
                (u - v).abs()
            }
            (Metric::Euclidean, Covariate::Vector(u), Covariate::Vector(v)) => {
                u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            (Metric::CurveL2 { step }, Covariate::Curve(u), Covariate::Curve(v)) => {
                (step * u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).sqrt()
            }
            (Metric::CurveSup, Covariate::Curve(u), Covariate::Curve(v)) => {
                u.iter().zip(v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            _ => unreachable!("shape compatibility checked above"),
        };
        Ok(d)
    }
}
