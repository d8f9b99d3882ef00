//! Configuration resolution.
//!
//! Command-line flags are merged over optional `key = value` config-file
//! entries (flags win), every value is validated, and library parameter
//! objects are constructed — all before any dataset is read or generated.
//! Problems are collected rather than reported one at a time, so a bad
//! invocation fails with a single message listing everything wrong with it.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use condtail::{
    Bandwidths, Covariate, CovariateLaw, CsfProbe, Design, FunctionalRegistry, McConfig,
    PhiParams, TailFunctional, TailModel, TauGrid,
};

use crate::{Cli, Command, CommonOpts, GeneratorOpts, PhiOpts};

/// A fully validated run: every field below is ready to execute.
pub enum Job {
    Csf { core: EstimationCore, y: f64 },
    Quantile { core: EstimationCore, alpha: f64 },
    TailIndex { core: EstimationCore, alpha: f64, grid: TauGrid, phi: Box<dyn TailFunctional> },
    Extrapolate {
        core: EstimationCore,
        alpha: f64,
        beta: f64,
        grid: TauGrid,
        phi: Box<dyn TailFunctional>,
    },
    Simulate { design: Design, model: TailModel, out: PathBuf },
    Validate {
        design: Design,
        model: TailModel,
        mc: McConfig,
        replicates: usize,
        out: Option<PathBuf>,
    },
    VarianceScan { gamma: f64, jmax: usize, out: Option<PathBuf> },
}

/// The dataset-reading commands share these resolved fields. The raw `--x`
/// coordinates stay untyped here: their covariate shape is fixed by the
/// dataset header once the input file is read.
pub struct EstimationCore {
    pub input: PathBuf,
    pub x: Vec<f64>,
    pub bandwidths: Bandwidths,
    pub out: Option<PathBuf>,
}

/// Flag values layered over config-file entries, with a problem list.
struct Resolver {
    file: HashMap<String, String>,
    problems: Vec<String>,
}

impl Resolver {
    /// Load the config file (when given) and start with no problems.
    /// An unreadable or malformed file fails immediately: no later
    /// resolution step could be trusted without it.
    fn new(config: Option<&Path>) -> Result<Self, String> {
        let file = match config {
            Some(path) => load_config(path)?,
            None => HashMap::new(),
        };
        Ok(Resolver { file, problems: Vec::new() })
    }

    fn problem(&mut self, message: impl Into<String>) {
        self.problems.push(message.into());
    }

    /// The flag value when given, else the parsed config-file value, else
    /// `None`. A config value that fails to parse records a problem.
    fn opt<T: FromStr>(&mut self, cli: Option<T>, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        if cli.is_some() {
            return cli;
        }
        let raw = self.file.get(key)?.clone();
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                self.problem(format!("config key '{key}': cannot parse {raw:?}: {e}"));
                None
            }
        }
    }

    /// As [`opt`](Self::opt), but a missing value is itself a problem.
    fn req<T: FromStr>(&mut self, cli: Option<T>, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let v = self.opt(cli, key);
        if v.is_none() && !self.file.contains_key(key) {
            self.problem(format!("missing required flag --{key} (or config key '{key}')"));
        }
        v
    }

    /// Optional finite float; non-finite values are problems.
    fn opt_f64(&mut self, cli: Option<f64>, key: &str) -> Option<f64> {
        let v = self.opt::<f64>(cli, key)?;
        if !v.is_finite() {
            self.problem(format!("--{key} must be finite, got {v}"));
            return None;
        }
        Some(v)
    }

    /// Required finite float.
    fn req_f64(&mut self, cli: Option<f64>, key: &str) -> Option<f64> {
        let v = self.req::<f64>(cli, key)?;
        if !v.is_finite() {
            self.problem(format!("--{key} must be finite, got {v}"));
            return None;
        }
        Some(v)
    }

    /// Fold a library constructor result into the problem list.
    fn check<T>(&mut self, built: condtail::Result<T>) -> Option<T> {
        match built {
            Ok(v) => Some(v),
            Err(e) => {
                self.problem(e.to_string());
                None
            }
        }
    }

    fn finish(self) -> Result<(), String> {
        if self.problems.is_empty() {
            Ok(())
        } else {
            Err(format!("invalid configuration:\n  - {}", self.problems.join("\n  - ")))
        }
    }
}

/// Parse a plain `key = value` file. `#` starts a comment; blank lines are
/// skipped. Unknown keys are allowed so one file can serve several commands.
fn load_config(path: &Path) -> Result<HashMap<String, String>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    let mut problems = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) => {
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
            None => problems.push(format!(
                "config line {}: expected `key = value`, got {raw:?}",
                i + 1
            )),
        }
    }
    if problems.is_empty() {
        Ok(map)
    } else {
        Err(format!("invalid configuration:\n  - {}", problems.join("\n  - ")))
    }
}

/// Parse a comma list of finite numbers.
fn parse_number_list(r: &mut Resolver, name: &str, raw: &str) -> Option<Vec<f64>> {
    let mut values = Vec::new();
    for piece in raw.split(',') {
        match piece.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                r.problem(format!(
                    "--{name} must be a comma list of finite numbers, got {raw:?}"
                ));
                return None;
            }
        }
    }
    Some(values)
}

fn resolve_bandwidths(r: &mut Resolver, h: Option<f64>, lambda: Option<f64>) -> Option<Bandwidths> {
    let h = r.req_f64(h, "h");
    let lambda = r.opt_f64(lambda, "lambda").or(Some(0.0));
    match (h, lambda) {
        (Some(h), Some(lambda)) => r.check(Bandwidths::new(h, lambda)),
        _ => None,
    }
}

/// A required probability level in the open unit interval.
fn resolve_level(r: &mut Resolver, cli: Option<f64>, key: &str) -> Option<f64> {
    let v = r.req_f64(cli, key)?;
    if !(0.0 < v && v < 1.0) {
        r.problem(format!("--{key} must lie in the open interval (0, 1), got {v}"));
        return None;
    }
    Some(v)
}

fn resolve_core(r: &mut Resolver, common: &CommonOpts) -> Option<EstimationCore> {
    let input = r.req::<PathBuf>(common.input.clone(), "input");
    let x_raw = r.req::<String>(common.x.clone(), "x");
    let x = x_raw.and_then(|s| parse_number_list(r, "x", &s));
    let bandwidths = resolve_bandwidths(r, common.h, common.lambda);
    let out = r.opt::<PathBuf>(common.out.clone(), "out");
    match (input, x, bandwidths) {
        (Some(input), Some(x), Some(bandwidths)) => {
            Some(EstimationCore { input, x, bandwidths, out })
        }
        _ => None,
    }
}

/// Resolve the tail functional and its level grid. When `required` the
/// functional defaults to hill; otherwise omitting --phi means no
/// tail-index block, but a grid is still produced (the quantile block of
/// `validate` needs one). The grid defaults to 1,1/2,..,1/9, or to 4,2,1
/// when the functional is pickands.
fn resolve_phi_and_grid(
    r: &mut Resolver,
    opts: &PhiOpts,
    required: bool,
) -> (Option<Box<dyn TailFunctional>>, Option<TauGrid>) {
    let mut name = r.opt::<String>(opts.phi.clone(), "phi");
    if name.is_none() && required {
        name = Some("hill".to_string());
    }
    let p = r.opt_f64(opts.p, "p");
    let theta = r.opt_f64(opts.theta, "theta");
    if name.is_none() {
        if p.is_some() {
            r.problem("--p requires --phi");
        }
        if theta.is_some() {
            r.problem("--theta requires --phi");
        }
    }
    let phi = match name.as_deref() {
        Some(n) => {
            let registry = FunctionalRegistry::with_builtins();
            r.check(registry.build(n, &PhiParams { p, theta }))
        }
        None => None,
    };
    let grid = match r.opt::<String>(opts.taus.clone(), "taus") {
        Some(raw) => {
            let taus = parse_number_list(r, "taus", &raw);
            taus.and_then(|t| r.check(TauGrid::new(t)))
        }
        None => Some(if name.as_deref() == Some("pickands") {
            TauGrid::pickands()
        } else {
            TauGrid::reciprocal(9).expect("the static default grid is valid")
        }),
    };
    (phi, grid)
}

/// A covariate law plus response family, resolved into a design and model.
struct GeneratorSpec {
    design: Design,
    model: TailModel,
}

fn resolve_generator(r: &mut Resolver, g: &GeneratorOpts) -> Option<GeneratorSpec> {
    let law_name =
        r.opt::<String>(g.law.clone(), "law").unwrap_or_else(|| "scalar".to_string());
    let dim = r.opt::<usize>(g.dim, "dim");
    let grid_len = r.opt::<usize>(g.grid_len, "grid-len");
    let law = match law_name.as_str() {
        "scalar" => {
            if dim.is_some() {
                r.problem("--dim only applies to the vector law");
            }
            if grid_len.is_some() {
                r.problem("--grid-len only applies to the curve law");
            }
            Some(CovariateLaw::UniformScalar)
        }
        "vector" => {
            if grid_len.is_some() {
                r.problem("--grid-len only applies to the curve law");
            }
            Some(CovariateLaw::UniformVector { dim: dim.unwrap_or(2) })
        }
        "curve" => {
            if dim.is_some() {
                r.problem("--dim only applies to the vector law");
            }
            Some(CovariateLaw::RandomCurves { grid_len: grid_len.unwrap_or(16) })
        }
        other => {
            r.problem(format!("unknown covariate law '{other}'; known: scalar, vector, curve"));
            None
        }
    };
    let n = r.req::<usize>(g.n, "n");
    let seed = r.opt::<u64>(g.seed, "seed").unwrap_or(0);
    let design = match (law, n) {
        (Some(law), Some(n)) => r.check(Design::new(law, n, seed)),
        _ => None,
    };

    let family =
        r.opt::<String>(g.family.clone(), "family").unwrap_or_else(|| "pareto".to_string());
    let gamma = r.req_f64(g.gamma, "gamma");
    let rho = r.opt_f64(g.rho, "rho");
    let model = match family.as_str() {
        "pareto" => {
            if rho.is_some() {
                r.problem("--rho only applies to the burr family");
            }
            gamma.and_then(|g| r.check(TailModel::exact_pareto(g)))
        }
        "burr" => match (gamma, rho) {
            (Some(g), Some(rho)) => r.check(TailModel::burr(g, rho)),
            (_, None) => {
                r.problem("the burr family requires --rho (second-order exponent, rho < 0)");
                None
            }
            _ => None,
        },
        other => {
            r.problem(format!("unknown response family '{other}'; known: pareto, burr"));
            None
        }
    };

    match (design, model) {
        (Some(design), Some(model)) => Some(GeneratorSpec { design, model }),
        _ => None,
    }
}

/// Shape-check the raw `--x` coordinates against a generator law.
fn covariate_for_law(r: &mut Resolver, law: CovariateLaw, values: Vec<f64>) -> Option<Covariate> {
    let (expected, shape) = match law {
        CovariateLaw::UniformScalar => (1, "scalar"),
        CovariateLaw::UniformVector { dim } => (dim, "vector"),
        CovariateLaw::RandomCurves { grid_len } => (grid_len, "curve"),
    };
    if values.len() != expected {
        r.problem(format!(
            "--x must have {expected} coordinate(s) for the {shape} law, got {}",
            values.len()
        ));
        return None;
    }
    Some(match law {
        CovariateLaw::UniformScalar => Covariate::Scalar(values[0]),
        CovariateLaw::UniformVector { .. } => Covariate::Vector(values),
        CovariateLaw::RandomCurves { .. } => Covariate::Curve(values),
    })
}

/// The survival probe needs both its flags; either alone is a problem.
fn resolve_probe(
    r: &mut Resolver,
    probe_y: Option<f64>,
    probe_multipliers: Option<String>,
) -> Option<CsfProbe> {
    let anchor_y = r.opt_f64(probe_y, "probe-y");
    let raw = r.opt::<String>(probe_multipliers, "probe-multipliers");
    match (anchor_y, raw) {
        (None, None) => None,
        (Some(anchor_y), Some(raw)) => parse_number_list(r, "probe-multipliers", &raw)
            .map(|multipliers| CsfProbe { anchor_y, multipliers }),
        (Some(_), None) => {
            r.problem("--probe-y requires --probe-multipliers");
            None
        }
        (None, Some(_)) => {
            r.problem("--probe-multipliers requires --probe-y");
            None
        }
    }
}

fn finish<T>(r: Resolver, job: Option<T>) -> Result<T, String> {
    r.finish()?;
    Ok(job.expect("a missing value always records a problem"))
}

/// Resolve the parsed command line into a validated [`Job`].
pub fn resolve(cli: Cli) -> Result<Job, String> {
    match cli.command {
        Command::Csf(args) => {
            let mut r = Resolver::new(args.common.config.as_deref())?;
            let core = resolve_core(&mut r, &args.common);
            let y = r.req_f64(args.y, "y");
            let job = core.zip(y).map(|(core, y)| Job::Csf { core, y });
            finish(r, job)
        }
        Command::Quantile(args) => {
            let mut r = Resolver::new(args.common.config.as_deref())?;
            let core = resolve_core(&mut r, &args.common);
            let alpha = resolve_level(&mut r, args.alpha, "alpha");
            let job = core.zip(alpha).map(|(core, alpha)| Job::Quantile { core, alpha });
            finish(r, job)
        }
        Command::TailIndex(args) => {
            let mut r = Resolver::new(args.common.config.as_deref())?;
            let core = resolve_core(&mut r, &args.common);
            let alpha = resolve_level(&mut r, args.alpha, "alpha");
            let (phi, grid) = resolve_phi_and_grid(&mut r, &args.phi, true);
            let job = match (core, alpha, phi, grid) {
                (Some(core), Some(alpha), Some(phi), Some(grid)) => {
                    Some(Job::TailIndex { core, alpha, grid, phi })
                }
                _ => None,
            };
            finish(r, job)
        }
        Command::Extrapolate(args) => {
            let mut r = Resolver::new(args.common.config.as_deref())?;
            let core = resolve_core(&mut r, &args.common);
            let alpha = resolve_level(&mut r, args.alpha, "alpha");
            // beta <= alpha is the extrapolation's own precondition; it is
            // reported by the estimator, not here, so the error names it.
            let beta = resolve_level(&mut r, args.beta, "beta");
            let (phi, grid) = resolve_phi_and_grid(&mut r, &args.phi, true);
            let job = match (core, alpha, beta, phi, grid) {
                (Some(core), Some(alpha), Some(beta), Some(phi), Some(grid)) => {
                    Some(Job::Extrapolate { core, alpha, beta, grid, phi })
                }
                _ => None,
            };
            finish(r, job)
        }
        Command::Simulate(args) => {
            let mut r = Resolver::new(args.config.as_deref())?;
            let spec = resolve_generator(&mut r, &args.generator);
            let out = r.req::<PathBuf>(args.out.clone(), "out");
            let job = spec
                .zip(out)
                .map(|(spec, out)| Job::Simulate { design: spec.design, model: spec.model, out });
            finish(r, job)
        }
        Command::Validate(args) => {
            let mut r = Resolver::new(args.config.as_deref())?;
            let spec = resolve_generator(&mut r, &args.generator);
            let x_raw = r.req::<String>(args.x.clone(), "x");
            let x_values = x_raw.and_then(|s| parse_number_list(&mut r, "x", &s));
            let covariate = match (spec.as_ref().map(|s| s.design.law()), x_values) {
                (Some(law), Some(values)) => covariate_for_law(&mut r, law, values),
                _ => None,
            };
            let bandwidths = resolve_bandwidths(&mut r, args.h, args.lambda);
            let alpha = resolve_level(&mut r, args.alpha, "alpha");
            let (phi, grid) = resolve_phi_and_grid(&mut r, &args.phi, false);
            let replicates = match r.req::<usize>(args.replicates, "replicates") {
                Some(v) if v >= 2 => Some(v),
                Some(v) => {
                    r.problem(format!(
                        "--replicates must be at least 2 to form sample covariances, got {v}"
                    ));
                    None
                }
                None => None,
            };
            let probe = resolve_probe(&mut r, args.probe_y, args.probe_multipliers.clone());
            let out = r.opt::<PathBuf>(args.out.clone(), "out");

            let mc = match (covariate, bandwidths, alpha, grid) {
                (Some(x), Some(bw), Some(alpha), Some(grid)) => {
                    let mut config = McConfig::new(x, bw, alpha, grid);
                    if let Some(phi) = phi {
                        config = config.with_phi(phi);
                    }
                    if let Some(probe) = probe {
                        config = config.with_csf_probe(probe);
                    }
                    Some(config)
                }
                _ => None,
            };
            let job = match (spec, mc, replicates) {
                (Some(spec), Some(mc), Some(replicates)) => Some(Job::Validate {
                    design: spec.design,
                    model: spec.model,
                    mc,
                    replicates,
                    out,
                }),
                _ => None,
            };
            finish(r, job)
        }
        Command::VarianceScan(args) => {
            let mut r = Resolver::new(args.config.as_deref())?;
            let gamma = match r.opt_f64(args.gamma, "gamma") {
                Some(g) if g > 0.0 => Some(g),
                Some(g) => {
                    r.problem(format!("--gamma must be positive, got {g}"));
                    None
                }
                None => Some(1.0),
            };
            let jmax = match r.opt::<usize>(args.jmax, "jmax") {
                Some(j) if j >= 2 => Some(j),
                Some(j) => {
                    r.problem(format!("--jmax must be at least 2, got {j}"));
                    None
                }
                None => Some(15),
            };
            let out = r.opt::<PathBuf>(args.out.clone(), "out");
            let job = gamma
                .zip(jmax)
                .map(|(gamma, jmax)| Job::VarianceScan { gamma, jmax, out });
            finish(r, job)
        }
    }
}
