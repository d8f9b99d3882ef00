//! Observed samples (X_i, Y_i) with a metric on the covariate space.
//!
//! CSV layout: a header row with a `y` column for the response and either a
//! single `x` column (scalar covariate), columns `x1..xp` (vector), or
//! columns `t1..tp` (curve values on a uniform grid over [0,1]).

use std::fs::File;
use std::io::{Read, Write as IoWrite};
use std::path::Path;

use crate::core::covariate::{Covariate, Metric};
use crate::error::{Error, Result};

/// Covariate/response pairs plus the metric used to compare covariates.
///
/// All covariates share one shape and the responses are parallel to them:
/// `covariates()[i]` goes with `responses()[i]`.
#[derive(Debug, Clone)]
pub struct Dataset {
    covariates: Vec<Covariate>,
    responses: Vec<f64>,
    metric: Metric,
}

impl Dataset {
    pub fn new(covariates: Vec<Covariate>, responses: Vec<f64>, metric: Metric) -> Result<Self> {
        if covariates.is_empty() {
            return Err(Error::invalid_input("dataset must contain at least one observation"));
        }
        if covariates.len() != responses.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} responses (one per covariate)", covariates.len()),
                found: format!("{}", responses.len()),
            });
        }
        let first = &covariates[0];
        for c in &covariates {
            if !c.same_shape(first) {
                return Err(Error::invalid_input(format!(
                    "covariates must share one shape: found {} and {}",
                    first.shape(),
                    c.shape()
                )));
            }
            if !c.is_finite() {
                return Err(Error::invalid_input("covariate values must be finite"));
            }
        }
        if !metric.accepts(first) {
            return Err(Error::invalid_input(format!(
                "metric expects a {} covariate but the data are {}",
                metric.expected_shape(),
                first.shape()
            )));
        }
        metric.validate()?;
        for &y in &responses {
            if !y.is_finite() {
                return Err(Error::invalid_input("responses must be finite"));
            }
        }
        Ok(Dataset { covariates, responses, metric })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn covariates(&self) -> &[Covariate] {
        &self.covariates
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Replace the metric, revalidating it against the covariate shape.
    pub fn with_metric(self, metric: Metric) -> Result<Self> {
        Dataset::new(self.covariates, self.responses, metric)
    }

    /// Read a dataset from CSV, choosing a default metric from the header:
    /// absolute difference for `x`, Euclidean for `x1..xp`, and the
    /// grid-weighted curve L2 distance (step 1/(p-1)) for `t1..tp`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Ingest {
            line: 1,
            message: format!("cannot read header row: {e}"),
        })?;
        let layout = HeaderLayout::detect(headers)?;

        let mut covariates = Vec::new();
        let mut responses = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != layout.width() {
                return Err(Error::Ingest {
                    line,
                    message: format!(
                        "expected {} fields, found {}",
                        layout.width(),
                        record.len()
                    ),
                });
            }
            let parse = |idx: usize, name: &str| -> Result<f64> {
                let raw = &record[idx];
                let v: f64 = raw.trim().parse().map_err(|_| Error::Ingest {
                    line,
                    message: format!("column {name}: cannot parse {raw:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Ingest {
                        line,
                        message: format!("column {name}: value {v} is not finite"),
                    });
                }
                Ok(v)
            };
            responses.push(parse(layout.y_index, "y")?);
            covariates.push(layout.parse_covariate(&parse)?);
        }
        if covariates.is_empty() {
            return Err(Error::invalid_input("dataset must contain at least one observation"));
        }
        Dataset::new(covariates, responses, layout.default_metric())
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Dataset::from_csv_reader(File::open(path)?)
    }

    /// Write the dataset back out in the same CSV layout it is read from.
    /// Values are printed with the shortest representation that parses back
    /// to the identical floating-point number, so a write/read round trip is
    /// exact.
    pub fn write_csv<W: IoWrite>(&self, mut writer: W) -> Result<()> {
        let header: Vec<String> = match &self.covariates[0] {
            Covariate::Scalar(_) => vec!["y".to_string(), "x".to_string()],
            Covariate::Vector(v) => std::iter::once("y".to_string())
                .chain((1..=v.len()).map(|j| format!("x{j}")))
                .collect(),
            Covariate::Curve(v) => std::iter::once("y".to_string())
                .chain((1..=v.len()).map(|j| format!("t{j}")))
                .collect(),
        };
        writeln!(writer, "{}", header.join(","))?;
        for (c, y) in self.covariates.iter().zip(&self.responses) {
            let mut fields = vec![format!("{y}")];
            match c {
                Covariate::Scalar(x) => fields.push(format!("{x}")),
                Covariate::Vector(v) | Covariate::Curve(v) => {
                    fields.extend(v.iter().map(|x| format!("{x}")));
                }
            }
            writeln!(writer, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_csv(File::create(path)?)
    }
}

enum CovariateColumns {
    Scalar(usize),
    Vector(Vec<usize>),
    Curve(Vec<usize>),
}

struct HeaderLayout {
    y_index: usize,
    columns: CovariateColumns,
}

impl HeaderLayout {
    fn detect(headers: &csv::StringRecord) -> Result<Self> {
        let names: Vec<String> =
            headers.iter().map(|s| s.trim().to_ascii_lowercase()).collect();
        let bad = |message: String| Error::Ingest { line: 1, message };

        let y_index = names
            .iter()
            .position(|n| n == "y")
            .ok_or_else(|| bad("header must contain a `y` column".to_string()))?;
        let rest: Vec<(usize, &str)> = names
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != y_index)
            .map(|(i, n)| (i, n.as_str()))
            .collect();
        if rest.is_empty() {
            return Err(bad("header must contain covariate columns besides `y`".to_string()));
        }

        // One bare `x` column means a scalar covariate.
        if rest.len() == 1 && rest[0].1 == "x" {
            return Ok(HeaderLayout { y_index, columns: CovariateColumns::Scalar(rest[0].0) });
        }

        // Otherwise the covariate columns must be exactly x1..xp or t1..tp.
        let prefix = match rest[0].1.chars().next() {
            Some('x') => 'x',
            Some('t') => 't',
            _ => {
                return Err(bad(format!(
                    "unrecognized covariate column {:?}: expected `x`, `x1..xp`, or `t1..tp`",
                    rest[0].1
                )))
            }
        };
        let p = rest.len();
        let mut indices = vec![usize::MAX; p];
        for (col, name) in &rest {
            let ord: usize = name
                .strip_prefix(prefix)
                .and_then(|s| s.parse().ok())
                .filter(|&j| 1 <= j && j <= p)
                .ok_or_else(|| {
                    bad(format!(
                        "unrecognized covariate column {name:?}: expected {prefix}1..{prefix}{p}"
                    ))
                })?;
            if indices[ord - 1] != usize::MAX {
                return Err(bad(format!("duplicate covariate column {name:?}")));
            }
            indices[ord - 1] = *col;
        }
        let columns = if prefix == 'x' {
            CovariateColumns::Vector(indices)
        } else {
            if p < 2 {
                return Err(bad(
                    "curve covariates need at least two grid columns t1, t2, ...".to_string(),
                ));
            }
            CovariateColumns::Curve(indices)
        };
        Ok(HeaderLayout { y_index, columns })
    }

    fn width(&self) -> usize {
        1 + match &self.columns {
            CovariateColumns::Scalar(_) => 1,
            CovariateColumns::Vector(ix) | CovariateColumns::Curve(ix) => ix.len(),
        }
    }

    fn parse_covariate(&self, parse: &dyn Fn(usize, &str) -> Result<f64>) -> Result<Covariate> {
        match &self.columns {
            CovariateColumns::Scalar(i) => Ok(Covariate::Scalar(parse(*i, "x")?)),
            CovariateColumns::Vector(ix) => {
                let mut v = Vec::with_capacity(ix.len());
                for (j, &i) in ix.iter().enumerate() {
                    v.push(parse(i, &format!("x{}", j + 1))?);
                }
                Ok(Covariate::Vector(v))
            }
            CovariateColumns::Curve(ix) => {
                let mut v = Vec::with_capacity(ix.len());
                for (j, &i) in ix.iter().enumerate() {
                    v.push(parse(i, &format!("t{}", j + 1))?);
                }
                Ok(Covariate::Curve(v))
            }
        }
    }

    fn default_metric(&self) -> Metric {
        match &self.columns {
            CovariateColumns::Scalar(_) => Metric::AbsoluteDifference,
            CovariateColumns::Vector(_) => Metric::Euclidean,
            CovariateColumns::Curve(ix) => {
                Metric::CurveL2 { step: 1.0 / (ix.len() as f64 - 1.0) }
            }
        }
    }
}
