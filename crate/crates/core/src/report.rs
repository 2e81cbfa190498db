//! Deterministic CSV/JSON emission: '.' decimal separator, 12 significant
//! digits, LF line endings, header row always present.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Render a float with [`SIGNIFICANT_DIGITS`] significant digits, trailing
/// zeros trimmed; plain decimal notation inside a readable exponent range,
/// scientific outside it.
pub fn format_value(x: f64) -> String {
    format_significant(x, SIGNIFICANT_DIGITS)
}

pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }

    let scientific = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = scientific.split_once('e').expect("always has exponent");
    let exponent: i32 = exponent.parse().expect("valid exponent");
    let negative = mantissa.starts_with('-');
    let digit_run: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let trimmed = digit_run.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "1" } else { trimmed };

    let body = if (0..15).contains(&exponent) {
        let integer_len = exponent as usize + 1;
        if trimmed.len() <= integer_len {
            let mut s = trimmed.to_string();
            s.push_str(&"0".repeat(integer_len - trimmed.len()));
            s
        } else {
            format!("{}.{}", &trimmed[..integer_len], &trimmed[integer_len..])
        }
    } else if (-4..0).contains(&exponent) {
        format!("0.{}{}", "0".repeat((-exponent - 1) as usize), trimmed)
    } else {
        let mantissa = if trimmed.len() == 1 {
            trimmed.to_string()
        } else {
            format!("{}.{}", &trimmed[..1], &trimmed[1..])
        };
        format!("{mantissa}e{exponent}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Write a CSV file with a header row, LF endings, and no quoting (fields
/// are produced by this crate and never contain commas).
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let text = serde_json::to_string_pretty(value).expect("serializable manifest");
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_plain_decimals() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(2953.0), "2953");
        assert_eq!(format_value(0.02), "0.02");
        assert_eq!(format_value(-0.25), "-0.25");
        assert_eq!(format_value(14.163069544364), "14.1630695444");
        assert_eq!(format_value(2.0 / 14.0), "0.142857142857");
    }

    #[test]
    fn formats_extremes_scientifically() {
        assert_eq!(format_value(1.0e-9), "1e-9");
        assert_eq!(format_value(1.7828672419791e-6), "1.78286724198e-6");
        assert_eq!(format_value(3.0e17), "3e17");
        assert_eq!(format_value(f64::INFINITY), "inf");
    }

    #[test]
    fn rounding_carries_across_magnitude() {
        assert_eq!(format_significant(0.99999999999999, 12), "1");
        assert_eq!(format_significant(9.999999999999e-5, 12), "0.0001");
        assert_eq!(format_significant(0.000123456, 12), "0.000123456");
    }

    #[test]
    fn csv_has_header_and_lf(){
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &["a".into(), "b".into()],
            &[vec!["1".into(), "2".into()]],
        )
        .unwrap();
        let content = std::fs::read(&path).unwrap();
        assert_eq!(content, b"a,b\n1,2\n");
        assert!(!content.contains(&b'\r'));
    }
}
