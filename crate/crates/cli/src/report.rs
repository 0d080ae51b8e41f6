//! CSV reports: a header and rows of equal width.

use std::io;

use crate::error::{CliError, CliResult};

/// Missing value marker.
pub const NA: &str = "NA";

/// Minimum significant digits written for a number.
pub const MIN_SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvReport {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvReport {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell of `row` under `name`.
    pub fn get(&self, row: usize, name: &str) -> Option<&str> {
        Some(self.rows.get(row)?.get(self.column(name)?)?.as_str())
    }

    /// Numeric cell; `None` when the cell is missing, `NA` or not a number.
    pub fn number(&self, row: usize, name: &str) -> Option<f64> {
        self.get(row, name)?.parse().ok()
    }

    pub fn write_to(&self, out: impl io::Write) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    /// Reads a report back, rejecting ragged rows and an empty header.
    pub fn parse(text: &[u8]) -> CliResult<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text);
        let header: Vec<String> = r
            .headers()
            .map_err(|e| CliError::usage(format!("csv header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(|h| h.is_empty()) {
            return Err(CliError::usage("csv without header"));
        }
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| CliError::usage(format!("csv row: {e}")))
            })
            .collect::<CliResult<Vec<Vec<String>>>>()?;
        Ok(Self { header, rows })
    }
}

/// Decimal form that reads back to the same `f64`, padded with trailing
/// zeros to at least [`MIN_SIG_DIGITS`] significant digits.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let mut s = format!("{x}");
    let digits: String = s.chars().filter(char::is_ascii_digit).collect();
    let significant = digits.trim_start_matches('0').len().max(1);
    if significant < MIN_SIG_DIGITS {
        if !s.contains('.') {
            s.push('.');
        }
        let pad = if digits.trim_start_matches('0').is_empty() {
            // Zero: count the zeros after the point as the digits.
            MIN_SIG_DIGITS - 1
        } else {
            MIN_SIG_DIGITS - significant
        };
        s.extend(std::iter::repeat_n('0', pad));
    }
    s
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), fmt_num)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_with_padding() {
        for x in [0.0, 1.0, 0.1, 1e-4, 0.2306641705615492, 123456.0, -0.25, 1e-300, 6e22] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let sig = s
                .chars()
                .filter(char::is_ascii_digit)
                .collect::<String>()
                .trim_start_matches('0')
                .len();
            assert!(sig >= MIN_SIG_DIGITS || x == 0.0, "{s}");
        }
        assert_eq!(fmt_num(0.1), "0.100000000000");
        assert_eq!(fmt_num(0.0), "0.00000000000");
        assert_eq!(fmt_num(2.0), "2.00000000000");
    }

    #[test]
    fn report_round_trip() {
        let mut r = CsvReport::new(&["a", "b"]);
        r.push(vec![fmt_num(0.5), NA.into()]);
        r.push(vec!["x,y".into(), "\"q\"".into()]);
        let back = CsvReport::parse(&r.to_bytes().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.number(0, "a"), Some(0.5));
        assert_eq!(back.number(0, "b"), None);
    }

    #[test]
    fn ragged_input_is_rejected() {
        assert!(CsvReport::parse(b"a,b\n1,2\n3\n").is_err());
        assert!(CsvReport::parse(b"").is_err());
    }
}
