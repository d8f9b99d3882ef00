//! The built-in φ functionals.
//!
//! The Hill-type members are built from the increment power sum
//! m_p(x₁,…,x_J) = Σ_j (x_j − x₁)^p: Hill is m₁ itself, and the
//! generalized means m_p/m₁^{p−1} (Gomes–Martins form), m_p^{1/p}
//! (Segers form), and m_{pθ}^{1/θ}/m_{p−1} (Caeiro–Gomes form) trade
//! variance against robustness through their parameters. The Pickands
//! functional φ_P(x₁,x₂,x₃) = log((e^{x₂}−e^{x₁})/(e^{x₃}−e^{x₂})) lives
//! on the fixed grid (4, 2, 1).
//!
//! All of them are shift invariant and positively homogeneous — the two
//! properties the estimator construction needs — and all Hill-type members
//! require the leading level multiplier to be τ₁ = 1 so that the anchor
//! quantile of the family is q̂(α|x) itself.

use super::TailFunctional;
use crate::core::params::TauGrid;
use crate::error::{Error, Result};

/// m_p(x) = Σ_j (x_j − x₁)^p. With p = 0 every term is 1 (0⁰ = 1 here), so
/// m₀ = J. Fractional p needs nondecreasing input — a negative increment
/// raised to a fractional power has no real value.
fn increment_power_sum(v: &[f64], p: f64) -> Result<f64> {
    let base = v[0];
    let mut acc = 0.0;
    for &x in v {
        let term = (x - base).powf(p);
        if term.is_nan() {
            return Err(Error::DegeneratePhi {
                message: format!(
                    "increment {} is negative and the power {p} is fractional",
                    x - base
                ),
            });
        }
        acc += term;
    }
    Ok(acc)
}

fn require_nonempty(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: "at least one argument".to_string(),
            found: "an empty slice".to_string(),
        });
    }
    Ok(())
}

fn require_leading_one(grid: &TauGrid, name: &str) -> Result<()> {
    let first = grid.taus()[0];
    if first != 1.0 {
        return Err(Error::DegenerateGrid {
            message: format!(
                "the {name} functional anchors at q(alpha) and needs the leading level \
                 multiplier to be 1, got {first}"
            ),
        });
    }
    Ok(())
}

fn ensure_finite(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegeneratePhi {
            message: format!("the {name} functional is undefined on this input (value {value})"),
        })
    }
}

/// φ = m₁: the mean-of-log-excesses functional.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hill;

impl TailFunctional for Hill {
    fn name(&self) -> &str {
        "hill"
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        require_nonempty(v)?;
        Ok(v.iter().map(|x| x - v[0]).sum())
    }

    fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        require_nonempty(v)?;
        let mut g = vec![1.0; v.len()];
        g[0] = -((v.len() - 1) as f64);
        Ok(g)
    }

    fn validate_grid(&self, grid: &TauGrid) -> Result<()> {
        require_leading_one(grid, self.name())
    }
}

/// φ = m_p / m₁^{p−1}, parameterized by p > 0. p = 1 reduces to Hill.
#[derive(Debug, Clone, Copy)]
pub struct GomesMartins {
    p: f64,
}

impl GomesMartins {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::invalid_input(format!(
                "the gomes-martins functional needs p > 0, got {p}"
            )));
        }
        Ok(GomesMartins { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl TailFunctional for GomesMartins {
    fn name(&self) -> &str {
        "gomes-martins"
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        require_nonempty(v)?;
        let mp = increment_power_sum(v, self.p)?;
        let m1 = increment_power_sum(v, 1.0)?;
        ensure_finite(self.name(), mp / m1.powf(self.p - 1.0))
    }

    fn validate_grid(&self, grid: &TauGrid) -> Result<()> {
        require_leading_one(grid, self.name())
    }
}

/// φ = m_p^{1/p}, parameterized by p > 0.
#[derive(Debug, Clone, Copy)]
pub struct Segers {
    p: f64,
}

impl Segers {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::invalid_input(format!(
                "the segers functional needs p > 0, got {p}"
            )));
        }
        Ok(Segers { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl TailFunctional for Segers {
    fn name(&self) -> &str {
        "segers"
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        require_nonempty(v)?;
        ensure_finite(self.name(), increment_power_sum(v, self.p)?.powf(1.0 / self.p))
    }

    fn validate_grid(&self, grid: &TauGrid) -> Result<()> {
        require_leading_one(grid, self.name())
    }
}

/// φ = m_{pθ}^{1/θ} / m_{p−1}, parameterized by p ≥ 1 and θ > 0.
#[derive(Debug, Clone, Copy)]
pub struct CaeiroGomes {
    p: f64,
    theta: f64,
}

impl CaeiroGomes {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::invalid_input(format!(
                "the caeiro-gomes functional needs p >= 1, got {p}"
            )));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::invalid_input(format!(
                "the caeiro-gomes functional needs theta > 0, got {theta}"
            )));
        }
        Ok(CaeiroGomes { p, theta })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl TailFunctional for CaeiroGomes {
    fn name(&self) -> &str {
        "caeiro-gomes"
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        require_nonempty(v)?;
        let top = increment_power_sum(v, self.p * self.theta)?.powf(1.0 / self.theta);
        let bottom = increment_power_sum(v, self.p - 1.0)?;
        ensure_finite(self.name(), top / bottom)
    }

    fn validate_grid(&self, grid: &TauGrid) -> Result<()> {
        require_leading_one(grid, self.name())
    }
}

/// φ_P(x₁,x₂,x₃) = log((e^{x₂}−e^{x₁})/(e^{x₃}−e^{x₂})) on the fixed level
/// grid (4, 2, 1).
///
/// Evaluation factors out the largest exponential in each difference
/// (log(e^b − e^a) = b + log(−expm1(a − b)) for a < b) so the value stays
/// accurate when the components are large or nearly equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pickands;

impl Pickands {
    fn check(v: &[f64]) -> Result<(f64, f64, f64)> {
        if v.len() != 3 {
            return Err(Error::DimensionMismatch {
                expected: "3 arguments".to_string(),
                found: format!("{}", v.len()),
            });
        }
        let (x1, x2, x3) = (v[0], v[1], v[2]);
        if !(x1 < x2 && x2 < x3) {
            return Err(Error::DegeneratePhi {
                message: format!(
                    "the pickands functional needs strictly increasing components; \
                     equal exponentials make the ratio degenerate (got {x1}, {x2}, {x3})"
                ),
            });
        }
        Ok((x1, x2, x3))
    }
}

impl TailFunctional for Pickands {
    fn name(&self) -> &str {
        "pickands"
    }

    fn eval(&self, v: &[f64]) -> Result<f64> {
        let (x1, x2, x3) = Pickands::check(v)?;
        let num = x2 + (-(x1 - x2).exp_m1()).ln();
        let den = x3 + (-(x2 - x3).exp_m1()).ln();
        Ok(num - den)
    }

    fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        let (x1, x2, x3) = Pickands::check(v)?;
        let e1 = (x1 - x2).exp_m1();
        let e2 = (x2 - x3).exp_m1();
        Ok(vec![
            (x1 - x2).exp() / e1,
            -1.0 / e1 - (x2 - x3).exp() / e2,
            1.0 / e2,
        ])
    }

    fn validate_grid(&self, grid: &TauGrid) -> Result<()> {
        if grid.taus() != [4.0, 2.0, 1.0] {
            return Err(Error::DegenerateGrid {
                message: format!(
                    "the pickands functional is defined on the level grid (4, 2, 1), \
                     got ({})",
                    grid.taus()
                        .iter()
                        .map(|t| t.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tailindex::finite_difference_gradient;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn all_specs() -> Vec<Box<dyn TailFunctional>> {
        vec![
            Box::new(Hill),
            Box::new(GomesMartins::new(2.0).unwrap()),
            Box::new(GomesMartins::new(0.7).unwrap()),
            Box::new(Segers::new(2.0).unwrap()),
            Box::new(Segers::new(0.5).unwrap()),
            Box::new(CaeiroGomes::new(1.0, 1.0).unwrap()),
            Box::new(CaeiroGomes::new(1.5, 2.0).unwrap()),
            Box::new(CaeiroGomes::new(2.0, 0.5).unwrap()),
        ]
    }

    /// A strictly increasing random vector of length j starting at 0-ish.
    fn random_sorted(rng: &mut StdRng, j: usize) -> Vec<f64> {
        let mut v = vec![rng.gen_range(-2.0..2.0)];
        for _ in 1..j {
            let step: f64 = rng.gen_range(0.05..1.5);
            v.push(v.last().unwrap() + step);
        }
        v
    }

    #[test]
    fn hill_eval_and_gradient_closed_forms() {
        assert_eq!(Hill.eval(&[0.0, 1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(Hill.gradient(&[5.0, 6.0, 9.0]).unwrap(), vec![-2.0, 1.0, 1.0]);
        let fd = finite_difference_gradient(|v| Hill.eval(v), &[0.3, 0.9, 2.4]).unwrap();
        for (a, b) in fd.iter().zip([-2.0, 1.0, 1.0]) {
            assert!((a - b).abs() <= 1e-6, "fd {fd:?}");
        }
        assert!(Hill.eval(&[]).is_err());
    }

    #[test]
    fn pickands_eval_matches_hand_value() {
        let v = [0.25f64.ln(), 0.5f64.ln(), 0.0];
        let got = Pickands.eval(&v).unwrap();
        let expect = 0.5f64.ln(); // (1/2 − 1/4)/(1 − 1/2) = 1/2
        assert!((got - expect).abs() <= 1e-15, "got {got}, expected {expect}");
        // Direct (unstabilized) evaluation agrees on benign inputs.
        let direct =
            ((v[1].exp() - v[0].exp()) / (v[2].exp() - v[1].exp())).ln();
        assert!((got - direct).abs() <= 1e-12);
    }

    #[test]
    fn pickands_rejects_degenerate_inputs() {
        assert!(matches!(
            Pickands.eval(&[0.0, 0.0, 1.0]),
            Err(Error::DegeneratePhi { .. })
        ));
        assert!(matches!(
            Pickands.eval(&[0.0, 1.0, 1.0]),
            Err(Error::DegeneratePhi { .. })
        ));
        assert!(matches!(
            Pickands.eval(&[2.0, 1.0, 3.0]),
            Err(Error::DegeneratePhi { .. })
        ));
        assert!(matches!(Pickands.eval(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pickands_gradient_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(4242);
        for _ in 0..200 {
            let v = random_sorted(&mut rng, 3);
            let analytic = Pickands.gradient(&v).unwrap();
            let fd = finite_difference_gradient(|u| Pickands.eval(u), &v).unwrap();
            for ((a, f), j) in analytic.iter().zip(&fd).zip(0..) {
                assert!(
                    (a - f).abs() <= 1e-5 * a.abs().max(1.0),
                    "component {j} at {v:?}: analytic {a} vs fd {f}"
                );
            }
            let sum: f64 = analytic.iter().sum();
            assert!(sum.abs() <= 1e-9, "gradient must sum to zero, got {sum} at {v:?}");
        }
    }

    #[test]
    fn shift_invariance_and_homogeneity() {
        let mut rng = StdRng::seed_from_u64(1009);
        let specs = all_specs();
        for _ in 0..1000 {
            let j = rng.gen_range(2..=9usize);
            let v = random_sorted(&mut rng, j);
            let eta: f64 = rng.gen_range(-4.0..4.0);
            let theta: f64 = rng.gen_range(0.1..5.0);
            let shifted: Vec<f64> = v.iter().map(|x| x + eta).collect();
            let scaled: Vec<f64> = v.iter().map(|x| x * theta).collect();
            for spec in &specs {
                let base = spec.eval(&v).unwrap();
                let at_shift = spec.eval(&shifted).unwrap();
                assert!(
                    (at_shift - base).abs() <= 1e-9 * base.abs().max(1.0),
                    "{}: shift by {eta} moved {base} to {at_shift} at {v:?}",
                    spec.name()
                );
                let at_scale = spec.eval(&scaled).unwrap();
                assert!(
                    (at_scale - theta * base).abs() <= 1e-9 * (theta * base).abs().max(1.0),
                    "{}: scale by {theta} gave {at_scale}, expected {} at {v:?}",
                    spec.name(),
                    theta * base
                );
            }
            if j == 3 {
                let base = Pickands.eval(&v).unwrap();
                let at_shift = Pickands.eval(&shifted).unwrap();
                assert!((at_shift - base).abs() <= 1e-9 * base.abs().max(1.0));
                // φ_P is shift invariant but not homogeneous; homogeneity
                // is not asserted for it.
            }
        }
    }

    #[test]
    fn gradient_components_sum_to_zero_for_all_specs() {
        // Differentiated shift invariance: ∇φ · (1,…,1) = 0.
        let mut rng = StdRng::seed_from_u64(90210);
        let specs = all_specs();
        for _ in 0..100 {
            let j = rng.gen_range(2..=7usize);
            let v = random_sorted(&mut rng, j);
            for spec in &specs {
                let g = spec.gradient(&v).unwrap();
                let sum: f64 = g.iter().sum();
                assert!(
                    sum.abs() <= 1e-4,
                    "{}: gradient sums to {sum} at {v:?}",
                    spec.name()
                );
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(GomesMartins::new(0.0).is_err());
        assert!(GomesMartins::new(-2.0).is_err());
        assert!(GomesMartins::new(f64::NAN).is_err());
        assert!(Segers::new(0.0).is_err());
        assert!(CaeiroGomes::new(0.5, 1.0).is_err(), "p < 1 rejected");
        assert!(CaeiroGomes::new(1.0, 0.0).is_err(), "theta must be positive");
        assert!(CaeiroGomes::new(1.0, -3.0).is_err());
        assert!(CaeiroGomes::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn gomes_martins_with_unit_p_is_hill() {
        let gm = GomesMartins::new(1.0).unwrap();
        let v = [0.0, 0.7, 1.9, 2.2];
        assert!((gm.eval(&v).unwrap() - Hill.eval(&v).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn caeiro_gomes_zeroth_moment_counts_components() {
        // p = 1 makes the denominator m₀ = J (every increment to the power
        // zero contributes 1, including the leading zero increment).
        let cg = CaeiroGomes::new(1.0, 1.0).unwrap();
        let v = [1.0, 2.0, 4.0];
        let expect = Hill.eval(&v).unwrap() / 3.0;
        assert!((cg.eval(&v).unwrap() - expect).abs() <= 1e-12);
    }

    #[test]
    fn fractional_powers_reject_decreasing_inputs() {
        let seg = Segers::new(0.5).unwrap();
        assert!(matches!(seg.eval(&[0.0, -1.0]), Err(Error::DegeneratePhi { .. })));
        // Integer powers accept them (the power is well defined).
        let gm = GomesMartins::new(2.0).unwrap();
        assert!(gm.eval(&[0.0, -1.0]).is_ok());
    }

    #[test]
    fn degenerate_flat_input_is_reported_for_ratio_forms() {
        let gm = GomesMartins::new(2.0).unwrap();
        assert!(matches!(gm.eval(&[1.0, 1.0, 1.0]), Err(Error::DegeneratePhi { .. })));
    }

    #[test]
    fn hill_type_grids_must_lead_with_one() {
        let good = TauGrid::new(vec![1.0, 0.5]).unwrap();
        let bad = TauGrid::new(vec![2.0, 1.0]).unwrap();
        for spec in all_specs() {
            assert!(spec.validate_grid(&good).is_ok(), "{}", spec.name());
            assert!(spec.validate_grid(&bad).is_err(), "{}", spec.name());
        }
        assert!(Pickands.validate_grid(&TauGrid::pickands()).is_ok());
        assert!(Pickands.validate_grid(&good).is_err());
    }
}
