//! Monte Carlo scoring of the estimators against exact oracles.
//!
//! A run draws independent replicates of a [`Design`] under a [`TailModel`],
//! applies the kernel estimators at a fixed covariate point, and aggregates
//! *normalized* errors whose limiting laws are known:
//!
//! * quantile block: z_j = σ̂ₙ⁻¹(x)·(q̂(τ_jα|x)/q(τ_jα|x) − 1), jointly
//!   asymptotically centred normal with covariance γ²(x)·Σ,
//!   Σ_{jk} = 1/τ_{min(j,k)};
//! * tail-index block: (γ̂(x) − γ(x))/(σ̂ₙ(x)·√V) → N(0, 1), with V the
//!   asymptotic variance of the chosen functional at γ(x);
//! * survival block: √(n·μ̂ₓ(h)·F̄(y|x)) · (F̂̄(a_j·y|x)/F̄(a_j·y|x) − 1)
//!   at an anchor y and increasing multipliers a_j, jointly centred normal
//!   with covariance C_{jk} = a_{min(j,k)}^{1/γ(x)}.
//!
//! The covariance targets are quoted for the uniform covariate kernel (the
//! default); other weightings inflate them by a kernel-moment ratio, which
//! is why reports pair every empirical moment with its target instead of
//! asserting against it.
//!
//! Replicates are embarrassingly parallel: each one reads its own stream of
//! the design's seeded generator and rows are merged in replicate order, so
//! a report is a pure function of (design, model, config, replicates) —
//! byte-stable CSV regardless of thread count. Replicates whose estimator
//! fails (say, an empty neighborhood at a small bandwidth) are counted, and
//! a run where more than 10% fail is refused as unstable rather than
//! summarized from the survivors.

use std::fmt;

use rayon::prelude::*;

use super::{true_csf, true_quantile, Design, TailModel};
use crate::core::covariate::Covariate;
use crate::core::kernel::KernelPair;
use crate::core::params::{Bandwidths, TauGrid};
use crate::csf::{csf_estimate, kernel_moment, small_ball_estimate};
use crate::error::{Error, Result};
use crate::quantile::{quantile_estimate, quantile_path, sigma_n};
use crate::sigfig::format_significant;
use crate::tailindex::{asymptotic_variance, tail_index_from_quantiles, TailFunctional};

/// Where to probe the survival estimator: the anchor level y and the
/// multipliers a_1 < a_2 < … scanning deeper into the tail.
#[derive(Debug, Clone, PartialEq)]
pub struct CsfProbe {
    pub anchor_y: f64,
    pub multipliers: Vec<f64>,
}

/// What to estimate in each replicate. The quantile block always runs;
/// the tail-index and survival blocks are optional add-ons.
pub struct McConfig {
    pub kernels: KernelPair,
    pub bandwidths: Bandwidths,
    pub x: Covariate,
    pub alpha: f64,
    pub grid: TauGrid,
    pub phi: Option<Box<dyn TailFunctional>>,
    pub csf_probe: Option<CsfProbe>,
}

impl McConfig {
    /// A quantile-only configuration with the default kernel pair.
    pub fn new(x: Covariate, bandwidths: Bandwidths, alpha: f64, grid: TauGrid) -> Self {
        McConfig {
            kernels: KernelPair::default(),
            bandwidths,
            x,
            alpha,
            grid,
            phi: None,
            csf_probe: None,
        }
    }

    pub fn with_kernels(mut self, kernels: KernelPair) -> Self {
        self.kernels = kernels;
        self
    }

    /// Also score a tail-index estimator built on `phi` over the same grid.
    pub fn with_phi(mut self, phi: Box<dyn TailFunctional>) -> Self {
        self.phi = Some(phi);
        self
    }

    /// Also score the survival estimator at the probe's points.
    pub fn with_csf_probe(mut self, probe: CsfProbe) -> Self {
        self.csf_probe = Some(probe);
        self
    }
}

impl fmt::Debug for McConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("McConfig")
            .field("kernels", &self.kernels)
            .field("bandwidths", &self.bandwidths)
            .field("x", &self.x)
            .field("alpha", &self.alpha)
            .field("grid", &self.grid)
            .field("phi", &self.phi.as_ref().map(|p| p.name()))
            .field("csf_probe", &self.csf_probe)
            .finish()
    }
}

/// Empirical moments of one block of normalized errors, next to the
/// covariance the limit theory predicts. Means target zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSummary {
    /// The levels (quantile block), the anchor level (tail block), or the
    /// probe points a_j·y (survival block).
    pub levels: Vec<f64>,
    pub mean: Vec<f64>,
    /// Sample covariance across replicates (denominator m − 1).
    pub covariance: Vec<Vec<f64>>,
    /// The limiting covariance for the uniform covariate kernel.
    pub target: Vec<Vec<f64>>,
}

/// Replicate averages of the rate products reported by the quantile
/// estimator; see [`crate::quantile::RateDiagnostics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsSummary {
    pub ball_mass: f64,
    pub bandwidth_bias: f64,
    pub smoothing_ratio: f64,
}

/// The aggregate of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub replicates: usize,
    pub failures: usize,
    pub quantile: BlockSummary,
    pub tail_index: Option<BlockSummary>,
    pub csf: Option<BlockSummary>,
    pub diagnostics: DiagnosticsSummary,
}

struct RepRow {
    z: Vec<f64>,
    zg: Option<f64>,
    w: Option<Vec<f64>>,
    diag: [f64; 3],
}

struct ProbeCtx {
    points: Vec<f64>,
    truths: Vec<f64>,
    anchor_survival: f64,
    target: Vec<Vec<f64>>,
}

/// Run `replicates` independent replicates of `design` under `model` and
/// summarize the normalized estimator errors configured in `config`.
///
/// Needs at least two replicates (sample covariances divide by m − 1).
/// Fails with [`Error::UnstableConfiguration`] when more than 10% of the
/// replicates error out.
pub fn monte_carlo(
    design: &Design,
    model: &TailModel,
    config: &McConfig,
    replicates: usize,
) -> Result<McReport> {
    if replicates < 2 {
        return Err(Error::invalid_input(format!(
            "at least two replicates are needed to form sample covariances, got {replicates}"
        )));
    }
    if !design.law().compatible_with(&config.x) {
        return Err(Error::invalid_input(format!(
            "the evaluation point has shape {}, which the design's covariate law does not produce",
            config.x.shape()
        )));
    }
    let gamma = model.gamma_at(&config.x)?;

    let levels = config.grid.levels(config.alpha);
    let mut q_true = Vec::with_capacity(levels.len());
    for &level in &levels {
        q_true.push(true_quantile(model, &config.x, level)?);
    }
    let taus = config.grid.taus();
    let dim = taus.len();
    let mut quantile_target = vec![vec![0.0; dim]; dim];
    for (a, row) in quantile_target.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = gamma * gamma / taus[a.min(b)];
        }
    }

    let tail_ctx: Option<(&dyn TailFunctional, f64)> = match &config.phi {
        Some(phi) => {
            phi.validate_grid(&config.grid)?;
            let v = asymptotic_variance(phi.as_ref(), gamma, &config.grid)?;
            Some((phi.as_ref(), v))
        }
        None => None,
    };

    let probe_ctx: Option<ProbeCtx> = match &config.csf_probe {
        Some(CsfProbe { anchor_y, multipliers }) => {
            if !(anchor_y.is_finite() && *anchor_y >= 1.0) {
                return Err(Error::invalid_input(format!(
                    "the survival anchor must lie in the support [1, inf), got {anchor_y}"
                )));
            }
            if multipliers.is_empty() {
                return Err(Error::invalid_input(
                    "the survival probe needs at least one multiplier",
                ));
            }
            for &a in multipliers {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::invalid_input(format!(
                        "survival probe multipliers must be positive and finite, got {a}"
                    )));
                }
            }
            if multipliers.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid_input(
                    "survival probe multipliers must be strictly increasing",
                ));
            }
            if multipliers[0] * anchor_y < 1.0 {
                return Err(Error::invalid_input(format!(
                    "the first probe point a_1*y = {} falls below the support floor",
                    multipliers[0] * anchor_y
                )));
            }
            let points: Vec<f64> = multipliers.iter().map(|a| a * anchor_y).collect();
            let truths = points
                .iter()
                .map(|&p| true_csf(model, &config.x, p))
                .collect::<Result<Vec<f64>>>()?;
            let anchor_survival = true_csf(model, &config.x, *anchor_y)?;
            let k = multipliers.len();
            let mut target = vec![vec![0.0; k]; k];
            for (a, row) in target.iter_mut().enumerate() {
                for (b, cell) in row.iter_mut().enumerate() {
                    *cell = multipliers[a.min(b)].powf(1.0 / gamma);
                }
            }
            Some(ProbeCtx { points, truths, anchor_survival, target })
        }
        None => None,
    };

    let rows: Vec<Result<RepRow>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<RepRow> {
            let ds = design.generate_replicate(model, r)?;
            let path = quantile_path(
                &ds,
                config.kernels,
                config.bandwidths,
                &config.x,
                config.alpha,
                &config.grid,
            )?;
            let sigma = sigma_n(&ds, config.kernels, config.bandwidths, &config.x, config.alpha)?;
            let z: Vec<f64> =
                path.iter().zip(&q_true).map(|(&qh, &qt)| (qh / qt - 1.0) / sigma).collect();
            let zg = match tail_ctx {
                Some((phi, v)) => {
                    let gamma_hat = tail_index_from_quantiles(&path, &config.grid, phi)?;
                    Some((gamma_hat - gamma) / (sigma * v.sqrt()))
                }
                None => None,
            };
            let w = match &probe_ctx {
                Some(ctx) => {
                    let moment = kernel_moment(
                        &ds,
                        config.kernels.k,
                        config.bandwidths.h(),
                        &config.x,
                        1.0,
                    )?;
                    let scale = (ds.n() as f64 * moment * ctx.anchor_survival).sqrt();
                    let mut out = Vec::with_capacity(ctx.points.len());
                    for (&p, &t) in ctx.points.iter().zip(&ctx.truths) {
                        let est =
                            csf_estimate(&ds, config.kernels, config.bandwidths, &config.x, p)?
                                .value;
                        out.push(scale * (est / t - 1.0));
                    }
                    Some(out)
                }
                None => None,
            };
            let ball = small_ball_estimate(&ds, &config.x, config.bandwidths.h())?;
            let anchor_q = if (taus[0] - 1.0).abs() <= f64::EPSILON {
                path[0]
            } else {
                quantile_estimate(&ds, config.kernels, config.bandwidths, &config.x, config.alpha)?
                    .value
            };
            let diag = [
                ds.n() as f64 * ball * config.alpha,
                config.bandwidths.h() * config.alpha.ln().abs() / sigma,
                config.bandwidths.lambda() / (sigma * anchor_q),
            ];
            Ok(RepRow { z, zg, w, diag })
        })
        .collect();

    let mut failures = 0usize;
    let mut kept: Vec<RepRow> = Vec::with_capacity(replicates);
    for row in rows {
        match row {
            Ok(r) => kept.push(r),
            Err(_) => failures += 1,
        }
    }
    if failures * 10 > replicates {
        return Err(Error::UnstableConfiguration { failures, replicates });
    }

    let zrows: Vec<&[f64]> = kept.iter().map(|r| r.z.as_slice()).collect();
    let (mean, covariance) = mean_and_cov(&zrows, dim);
    let quantile = BlockSummary { levels, mean, covariance, target: quantile_target };

    let tail_index = tail_ctx.map(|_| {
        let grows: Vec<Vec<f64>> =
            kept.iter().map(|r| vec![r.zg.expect("tail block computed per replicate")]).collect();
        let refs: Vec<&[f64]> = grows.iter().map(|v| v.as_slice()).collect();
        let (mean, covariance) = mean_and_cov(&refs, 1);
        BlockSummary { levels: vec![config.alpha], mean, covariance, target: vec![vec![1.0]] }
    });

    let csf = probe_ctx.map(|ctx| {
        let wrows: Vec<&[f64]> = kept
            .iter()
            .map(|r| r.w.as_deref().expect("survival block computed per replicate"))
            .collect();
        let (mean, covariance) = mean_and_cov(&wrows, ctx.points.len());
        BlockSummary { levels: ctx.points, mean, covariance, target: ctx.target }
    });

    let m = kept.len() as f64;
    let mut sums = [0.0; 3];
    for r in &kept {
        for (s, v) in sums.iter_mut().zip(r.diag) {
            *s += v;
        }
    }
    let diagnostics = DiagnosticsSummary {
        ball_mass: sums[0] / m,
        bandwidth_bias: sums[1] / m,
        smoothing_ratio: sums[2] / m,
    };

    Ok(McReport { replicates, failures, quantile, tail_index, csf, diagnostics })
}

/// Sample mean and covariance (denominator m − 1) of `rows`, each of
/// length `dim`. Needs at least two rows.
fn mean_and_cov(rows: &[&[f64]], dim: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (s, &v) in mean.iter_mut().zip(*r) {
            *s += v;
        }
    }
    for s in &mut mean {
        *s /= m;
    }
    let mut cov = vec![vec![0.0; dim]; dim];
    for r in rows {
        for a in 0..dim {
            for b in 0..dim {
                cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]);
            }
        }
    }
    for row in &mut cov {
        for v in row {
            *v /= m - 1.0;
        }
    }
    (mean, cov)
}

/// Whether a square matrix is positive semidefinite up to `jitter`: runs a
/// Cholesky factorization of M + jitter·I and reports whether it succeeds.
pub fn cholesky_psd(matrix: &[Vec<f64>], jitter: f64) -> bool {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return false;
    }
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    for i in 0..n {
        m[i][i] += jitter;
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s < 0.0 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = s / l[j][j];
            } else if s.abs() > jitter {
                // A vanished pivot admits no further mass in its column.
                return false;
            }
        }
    }
    true
}

fn sig10(v: f64) -> String {
    format_significant(v, 10)
}

fn join6(vs: &[f64]) -> String {
    vs.iter().map(|&v| format_significant(v, 6)).collect::<Vec<_>>().join(", ")
}

impl McReport {
    /// Serialize the report as CSV with columns
    /// `section,statistic,i,j,value,target` — one row per scalar, one row
    /// per covariance entry, indices 1-based, 10 significant digits.
    pub fn to_csv(&self) -> String {
        fn block(out: &mut String, section: &str, level_name: &str, b: &BlockSummary) {
            for (i, &lv) in b.levels.iter().enumerate() {
                out.push_str(&format!("{section},{level_name},{},,{},\n", i + 1, sig10(lv)));
            }
            for (i, &mv) in b.mean.iter().enumerate() {
                out.push_str(&format!("{section},mean,{},,{},0\n", i + 1, sig10(mv)));
            }
            for (i, row) in b.covariance.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    out.push_str(&format!(
                        "{section},covariance,{},{},{},{}\n",
                        i + 1,
                        j + 1,
                        sig10(v),
                        sig10(b.target[i][j])
                    ));
                }
            }
        }
        let mut out = String::from("section,statistic,i,j,value,target\n");
        out.push_str(&format!("run,replicates,,,{},\n", self.replicates));
        out.push_str(&format!("run,failures,,,{},\n", self.failures));
        block(&mut out, "quantile", "level", &self.quantile);
        if let Some(b) = &self.tail_index {
            block(&mut out, "tail_index", "level", b);
        }
        if let Some(b) = &self.csf {
            block(&mut out, "csf", "point", b);
        }
        out.push_str(&format!("diagnostics,ball_mass,,,{},\n", sig10(self.diagnostics.ball_mass)));
        out.push_str(&format!(
            "diagnostics,bandwidth_bias,,,{},\n",
            sig10(self.diagnostics.bandwidth_bias)
        ));
        out.push_str(&format!(
            "diagnostics,smoothing_ratio,,,{},\n",
            sig10(self.diagnostics.smoothing_ratio)
        ));
        out
    }
}

impl fmt::Display for McReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn block(
            f: &mut fmt::Formatter<'_>,
            title: &str,
            level_name: &str,
            b: &BlockSummary,
        ) -> fmt::Result {
            writeln!(f, "{title} at {level_name} [{}]:", join6(&b.levels))?;
            writeln!(f, "  mean        [{}]  (target 0)", join6(&b.mean))?;
            writeln!(f, "  covariance rows (empirical | target):")?;
            for (row, trow) in b.covariance.iter().zip(&b.target) {
                writeln!(f, "    [{}] | [{}]", join6(row), join6(trow))?;
            }
            Ok(())
        }
        writeln!(f, "monte carlo: {} replicates, {} failures", self.replicates, self.failures)?;
        block(f, "normalized quantile errors", "levels", &self.quantile)?;
        if let Some(b) = &self.tail_index {
            block(f, "normalized tail-index error", "anchor level", b)?;
        }
        if let Some(b) = &self.csf {
            block(f, "normalized survival errors", "points", b)?;
        }
        write!(
            f,
            "diagnostics: ball mass {}, bandwidth bias {}, smoothing ratio {}",
            format_significant(self.diagnostics.ball_mass, 6),
            format_significant(self.diagnostics.bandwidth_bias, 6),
            format_significant(self.diagnostics.smoothing_ratio, 6)
        )
    }
}
