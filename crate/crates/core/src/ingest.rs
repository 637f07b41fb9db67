//! Sampled paths read from CSV.

use std::io::Read;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point};
use crate::path::{Path, Smoothness};

/// Reads `t,x1,…,xn` rows into a piecewise-linear path in Euclidean `Rⁿ`.
///
/// `t` must be strictly increasing and every value finite; at least two rows
/// are required. Error rows are file line numbers, the header being line 1.
pub fn parse_csv_path<R: Read>(reader: R) -> Result<Path> {
    parse_csv_path_in(reader, None)
}

/// As [`parse_csv_path`] but in `space`, whose dimension must match the
/// coordinate columns. `None` means Euclidean.
pub fn parse_csv_path_in<R: Read>(reader: R, space: Option<&MetricSpace>) -> Result<Path> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(1, e))?.clone();
    let dim = check_header(&headers)?;

    let mut ts: Vec<f64> = Vec::new();
    let mut xs: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            csv_err(row, e)
        })?;
        let row = rec.position().map_or(ts.len() + 2, |p| p.line() as usize);
        if rec.len() != dim + 1 {
            return Err(Error::Csv {
                row,
                message: format!("expected {} fields, found {}", dim + 1, rec.len()),
            });
        }
        let mut vals = Vec::with_capacity(dim + 1);
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                row,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    row,
                    message: format!("non-finite value `{field}`"),
                });
            }
            vals.push(v);
        }
        let t = vals[0];
        if let Some(&prev) = ts.last() {
            if t <= prev {
                return Err(Error::Csv {
                    row,
                    message: format!("t = {t} does not increase past {prev}"),
                });
            }
        }
        ts.push(t);
        xs.push(vals[1..].to_vec());
    }
    if ts.len() < 2 {
        return Err(Error::Csv {
            row: ts.len() + 1,
            message: format!("need at least 2 data rows, found {}", ts.len()),
        });
    }
    match space {
        None => piecewise_linear(ts, xs),
        Some(space) if space.dim() == dim => piecewise_linear_in(ts, xs, space.clone()),
        Some(space) => Err(Error::Csv {
            row: 1,
            message: format!(
                "{dim} coordinate columns but space {space} has dimension {}",
                space.dim()
            ),
        }),
    }
}

/// Opens and parses a CSV file.
pub fn read_csv_path(file: &std::path::Path) -> Result<Path> {
    read_csv_path_in(file, None)
}

pub fn read_csv_path_in(file: &std::path::Path, space: Option<&MetricSpace>) -> Result<Path> {
    let f = std::fs::File::open(file).map_err(|e| Error::Csv {
        row: 0,
        message: format!("cannot open {}: {e}", file.display()),
    })?;
    parse_csv_path_in(f, space)
}

fn csv_err(row: usize, e: csv::Error) -> Error {
    Error::Csv {
        row,
        message: e.to_string(),
    }
}

fn check_header(h: &csv::StringRecord) -> Result<usize> {
    let bad = |message: String| Error::Csv { row: 1, message };
    if h.len() < 2 {
        return Err(bad(
            "header needs `t` and at least one coordinate column".into()
        ));
    }
    if &h[0] != "t" {
        return Err(bad(format!("first column must be `t`, found `{}`", &h[0])));
    }
    for (i, name) in h.iter().enumerate().skip(1) {
        if name != format!("x{i}") {
            return Err(bad(format!(
                "column {} must be `x{i}`, found `{name}`",
                i + 1
            )));
        }
    }
    Ok(h.len() - 1)
}

/// Linear interpolation between samples; the knots become breakpoints.
pub fn piecewise_linear(ts: Vec<f64>, xs: Vec<Vec<f64>>) -> Result<Path> {
    let dim = xs.first().map_or(0, Vec::len);
    piecewise_linear_in(ts, xs, MetricSpace::euclidean(dim))
}

/// Coordinate-wise linear interpolation in `space`. In a normed space each
/// piece is a geodesic, so the path is tagged piecewise linear; a snowflake
/// keeps the generic hint.
pub fn piecewise_linear_in(ts: Vec<f64>, xs: Vec<Vec<f64>>, space: MetricSpace) -> Result<Path> {
    let normed = !matches!(space, MetricSpace::Snowflake { .. });
    let (a, b) = (ts[0], ts[ts.len() - 1]);
    let knots = ts.clone();
    let (ts, xs) = (Arc::new(ts), Arc::new(xs));
    let path = Path::new(a, b, space, move |t| {
        let j = ts.partition_point(|&s| s <= t).clamp(1, ts.len() - 1);
        let (t0, t1) = (ts[j - 1], ts[j]);
        let w = (t - t0) / (t1 - t0);
        Point::new(
            xs[j - 1]
                .iter()
                .zip(&xs[j])
                .map(|(p, q)| if w == 1.0 { *q } else { p + w * (q - p) })
                .collect(),
        )
    })?;
    let path = path.with_breakpoints(knots);
    Ok(if normed {
        path.with_hint(Smoothness::PiecewiseLinear)
    } else {
        path
    })
}
