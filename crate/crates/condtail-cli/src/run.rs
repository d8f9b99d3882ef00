//! Job execution: load or generate data, run the estimator, print each
//! statistic with 10 significant digits, and mirror the same digit strings
//! to CSV when an output path was given.

use std::fs;
use std::io::{self, ErrorKind, Write};
use std::path::Path;

use condtail::sigfig::format_significant;
use condtail::{
    csf_estimate, extrapolate, hill_variance_scan, monte_carlo, quantile_estimate,
    rate_diagnostics, sigma_n, tail_index, Covariate, Dataset, KernelPair, Metric,
};

use crate::resolve::{EstimationCore, Job};

/// Ordered `statistic -> rendered value` rows. One rendering feeds both
/// stdout (`name value` lines) and the CSV mirror, so re-parsing the CSV
/// yields the printed values exactly.
struct Table {
    rows: Vec<(&'static str, String)>,
}

impl Table {
    fn new() -> Self {
        Table { rows: Vec::new() }
    }

    fn num(&mut self, name: &'static str, value: f64) {
        self.rows.push((name, format_significant(value, 10)));
    }

    fn int(&mut self, name: &'static str, value: usize) {
        self.rows.push((name, value.to_string()));
    }

    fn emit(self, out: Option<&Path>) -> Result<(), String> {
        for (name, value) in &self.rows {
            print_stdout(format_args!("{name} {value}\n"));
        }
        if let Some(path) = out {
            let mut csv = String::from("statistic,value\n");
            for (name, value) in &self.rows {
                csv.push_str(name);
                csv.push(',');
                csv.push_str(value);
                csv.push('\n');
            }
            write_text(path, &csv)?;
        }
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Writes to stdout without panicking when the reader has gone away.
///
/// The process must end quietly when its output is piped into a consumer
/// that stops reading early (`condtail ... | head`), so a closed pipe exits
/// with success instead of unwinding out of a failed `println!`.
fn print_stdout(text: std::fmt::Arguments<'_>) {
    let mut out = io::stdout().lock();
    let result = out.write_fmt(text).and_then(|()| out.flush());
    if let Err(error) = result {
        if error.kind() == ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {error}");
        std::process::exit(1);
    }
}

fn stringify(e: condtail::Error) -> String {
    e.to_string()
}

/// Interpret the raw `--x` coordinates in the dataset's covariate space,
/// which the CSV header fixed when the file was read.
fn covariate_for_dataset(ds: &Dataset, values: Vec<f64>) -> Result<Covariate, String> {
    match ds.metric() {
        Metric::AbsoluteDifference => {
            if values.len() == 1 {
                Ok(Covariate::Scalar(values[0]))
            } else {
                Err(format!(
                    "the dataset has scalar covariates; --x must be a single number, got {} values",
                    values.len()
                ))
            }
        }
        Metric::Euclidean => {
            check_arity(ds, values.len(), "coordinates")?;
            Ok(Covariate::Vector(values))
        }
        Metric::CurveL2 { .. } | Metric::CurveSup => {
            check_arity(ds, values.len(), "grid values")?;
            Ok(Covariate::Curve(values))
        }
    }
}

/// Rejects an `--x` whose length cannot match the dataset's covariate
/// columns, naming both sides so the fix is obvious.
fn check_arity(ds: &Dataset, supplied: usize, what: &str) -> Result<(), String> {
    match ds.covariates().first() {
        Some(first) if first.dim() != supplied => Err(format!(
            "the dataset has {} covariate columns; --x must supply {} {what}, got {supplied}",
            first.dim(),
            first.dim()
        )),
        _ => Ok(()),
    }
}

fn load(core: &EstimationCore) -> Result<(Dataset, Covariate), String> {
    let ds = Dataset::from_csv_path(&core.input)
        .map_err(|e| format!("{}: {e}", core.input.display()))?;
    let x = covariate_for_dataset(&ds, core.x.clone())?;
    Ok((ds, x))
}

/// Execute a resolved job. All estimation commands use the default kernel
/// pair (uniform over the covariate ball, biweight response smoothing).
pub fn run(job: Job) -> Result<(), String> {
    let kernels = KernelPair::default();
    match job {
        Job::Csf { core, y } => {
            let (ds, x) = load(&core)?;
            let est = csf_estimate(&ds, kernels, core.bandwidths, &x, y).map_err(stringify)?;
            let mut table = Table::new();
            table.num("csf", est.value);
            table.int("neighborhood", est.neighborhood_count);
            table.num("weight_sum", est.weight_sum);
            table.emit(core.out.as_deref())
        }
        Job::Quantile { core, alpha } => {
            let (ds, x) = load(&core)?;
            let est =
                quantile_estimate(&ds, kernels, core.bandwidths, &x, alpha).map_err(stringify)?;
            let diag =
                rate_diagnostics(&ds, kernels, core.bandwidths, &x, alpha).map_err(stringify)?;
            let mut table = Table::new();
            table.num("quantile", est.value);
            table.num("sigma_n", est.sigma_hat);
            table.int("neighborhood", est.neighborhood_count);
            table.num("ball_mass", diag.ball_mass);
            table.num("bandwidth_bias", diag.bandwidth_bias);
            table.num("smoothing_ratio", diag.smoothing_ratio);
            table.emit(core.out.as_deref())
        }
        Job::TailIndex { core, alpha, grid, phi } => {
            let (ds, x) = load(&core)?;
            let est = tail_index(&ds, kernels, core.bandwidths, &x, alpha, &grid, phi.as_ref())
                .map_err(stringify)?;
            let sigma = sigma_n(&ds, kernels, core.bandwidths, &x, alpha).map_err(stringify)?;
            let mut table = Table::new();
            table.num("gamma", est.gamma_hat);
            table.num("variance", est.variance_factor * est.gamma_hat * est.gamma_hat);
            table.num("sigma_n", sigma);
            table.num("standard_error", est.standard_error(sigma));
            table.emit(core.out.as_deref())
        }
        Job::Extrapolate { core, alpha, beta, grid, phi } => {
            let (ds, x) = load(&core)?;
            let est =
                extrapolate(&ds, kernels, core.bandwidths, &x, alpha, beta, &grid, phi.as_ref())
                    .map_err(stringify)?;
            let mut table = Table::new();
            table.num("quantile", est.value);
            table.num("anchor_level", est.anchor_level);
            table.num("target_level", est.target_level);
            table.num("gamma", est.gamma_used);
            table.num("extrapolation_factor", est.extrapolation_factor);
            table.emit(core.out.as_deref())
        }
        Job::Simulate { design, model, out } => {
            let ds = design.generate(&model).map_err(stringify)?;
            ds.write_csv_path(&out)
                .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            print_stdout(format_args!("wrote {} rows to {}\n", ds.n(), out.display()));
            Ok(())
        }
        Job::Validate { design, model, mc, replicates, out } => {
            let report = monte_carlo(&design, &model, &mc, replicates).map_err(stringify)?;
            let csv = report.to_csv();
            print_stdout(format_args!("{csv}"));
            if let Some(path) = out {
                write_text(&path, &csv)?;
            }
            Ok(())
        }
        Job::VarianceScan { gamma, jmax, out } => {
            let rows = hill_variance_scan(gamma, jmax).map_err(stringify)?;
            let mut csv = String::from("J,variance\n");
            for &(j, v) in &rows {
                csv.push_str(&format!("{j},{}\n", format_significant(v, 10)));
            }
            print_stdout(format_args!("{csv}"));
            let &(j_min, v_min) = rows
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("the scan covers at least J = 2");
            print_stdout(format_args!(
                "minimum at J = {j_min} with variance {}\n",
                format_significant(v_min, 10)
            ));
            if let Some(path) = out {
                write_text(&path, &csv)?;
            }
            Ok(())
        }
    }
}
