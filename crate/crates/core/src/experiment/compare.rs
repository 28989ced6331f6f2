use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMetric {
    /// `max |10 log10(a / b)|` over the grid, in dB.
    MaxRatioDb,
    /// Root-mean-square difference of the values.
    Rmse,
}

impl FromStr for CompareMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-ratio-db" => Ok(Self::MaxRatioDb),
            "rmse" => Ok(Self::Rmse),
            other => Err(Error::Config(format!("unknown metric `{other}` (max-ratio-db, rmse)"))),
        }
    }
}

impl fmt::Display for CompareMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MaxRatioDb => "max-ratio-db",
            Self::Rmse => "rmse",
        })
    }
}

/// `(f_norm, value)` pairs of a curve CSV.
pub fn read_curve(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            row: 0,
            message: format!("missing column `{name}`"),
        })
    };
    let (fi, vi) = (column("f_norm")?, column("value")?);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |idx: usize| {
            record
                .get(idx)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.display().to_string(),
                    row: i + 1,
                    message: format!("bad number `{}`", record.get(idx).unwrap_or("")),
                })
        };
        points.push((parse(fi)?, parse(vi)?));
    }
    Ok(points)
}

/// Discrepancy between two curves sampled on the same grid. Points where
/// both values are infinite are skipped; an infinity on one side only makes
/// the result infinite.
pub fn compare_curves(a: &[(f64, f64)], b: &[(f64, f64)], metric: CompareMetric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} points vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::GridMismatch("empty curves".into()));
    }
    for (i, (pa, pb)) in a.iter().zip(b).enumerate() {
        if (pa.0 - pb.0).abs() > 1e-9 * pa.0.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("point {i}: f_norm {} vs {}", pa.0, pb.0)));
        }
    }
    let pairs = a
        .iter()
        .zip(b)
        .map(|(pa, pb)| (pa.1, pb.1))
        .filter(|(x, y)| !(x.is_infinite() && y.is_infinite()));
    let value = match metric {
        CompareMetric::MaxRatioDb => pairs
            .map(|(x, y)| if x == y { 0.0 } else { (10.0 * (x / y).log10()).abs() })
            .fold(0.0, f64::max),
        CompareMetric::Rmse => {
            let (sum, n) = pairs.fold((0.0, 0usize), |(s, n), (x, y)| (s + (x - y).powi(2), n + 1));
            if n == 0 {
                0.0
            } else {
                (sum / n as f64).sqrt()
            }
        }
    };
    Ok(value)
}

pub fn compare_files(a: impl AsRef<Path>, b: impl AsRef<Path>, metric: CompareMetric) -> Result<f64> {
    compare_curves(&read_curve(a)?, &read_curve(b)?, metric)
}
