//! Plain CSV output: a header row, comma separators, LF line endings and
//! numbers printed with nine significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Formats like C's `%.9g`: fixed notation for exponents in `[-4, 9)`,
/// scientific otherwise, trailing zeros dropped.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn render<S: AsRef<str>>(header: &[S], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for row in rows {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{}", format_number(*v)).expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[S], rows: &[Vec<f64>]) -> Result<()> {
    std::fs::write(path, render(header, rows)).map_err(|e| Error::io(path, e))
}
