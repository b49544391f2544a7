//! CSV writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use coded_delay::sim::SimSummary;

use crate::sweep::ResultRow;

pub const HEADER: &str = "n,k,lambda,mu,D,wait_scale,analytic,lower,upper,sim_mean,ci95,in_sandwich,valid";

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// trimmed, exponent form outside `[1e-4, 1e9)`.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g9).unwrap_or_default()
}

pub fn format_row(r: &ResultRow) -> String {
    [
        r.n.to_string(),
        r.k.to_string(),
        opt(r.lambda),
        opt(r.mu),
        opt(r.delivery),
        opt(r.wait_scale),
        opt(r.analytic),
        opt(r.lower),
        opt(r.upper),
        opt(r.sim_mean),
        opt(r.ci95),
        r.in_sandwich.map(|b| b.to_string()).unwrap_or_default(),
        r.valid.to_string(),
    ]
    .join(",")
}

pub fn write_rows<W: Write>(rows: &[ResultRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for r in rows {
        writeln!(w, "{}", format_row(r))?;
    }
    w.flush()
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    File::create(path).map(BufWriter::new).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<(), OutputError> {
    if rows.is_empty() {
        return Err(OutputError {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::InvalidInput, "no rows to write"),
        });
    }
    let w = create(path)?;
    write_rows(rows, w).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_cdf<W: Write>(summary: &SimSummary, mut w: W) -> io::Result<()> {
    writeln!(w, "t,fraction")?;
    for p in &summary.ecdf {
        writeln!(w, "{},{}", format_g9(p.time), format_g9(p.fraction))?;
    }
    w.flush()
}

/// Writes the summary's downsampled ECDF as `t,fraction` rows.
pub fn emit_cdf(summary: &SimSummary, path: &Path) -> Result<(), OutputError> {
    let w = create(path)?;
    write_cdf(summary, w).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (1.0 / 3.0, "0.333333333"),
            (2.291269841269841, "2.29126984"),
            (0.04342879697923954, "0.043428797"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001, "1e-05"),
            (0.000012345, "1.2345e-05"),
            (-2.5, "-2.5"),
            (9.9999999999, "10"),
            (999999999.5, "1e+09"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g9(x), want, "{x}");
        }
    }

    #[test]
    fn g9_round_trips_to_nine_digits() {
        for x in [std::f64::consts::PI, 1e-300, 7.0e200, 0.1 + 0.2] {
            let back: f64 = format_g9(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-9, "{x}");
        }
    }
}
