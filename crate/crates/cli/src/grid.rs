//! Sweep grids: `a,b,c`, `lin:lo:hi:n` or `log:lo:hi:n`.

use coherent_qkd::analytics::log_grid;

use crate::error::{CliError, CliResult};

/// Upper bound on generated points, so a typo cannot allocate gigabytes.
pub const MAX_POINTS: usize = 100_000;

pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::usage("empty grid"));
    }
    let points = match spec.split_once(':') {
        Some((kind, rest)) => generated(kind.trim(), rest)?,
        None => spec
            .split(',')
            .map(|s| number(s, spec))
            .collect::<CliResult<Vec<_>>>()?,
    };
    if points.len() > MAX_POINTS {
        return Err(CliError::usage(format!(
            "grid has {} points (limit {MAX_POINTS})",
            points.len()
        )));
    }
    Ok(points)
}

fn number(s: &str, spec: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("bad number '{}' in grid '{spec}'", s.trim())))?;
    if !v.is_finite() {
        return Err(CliError::usage(format!("non-finite value in grid '{spec}'")));
    }
    Ok(v)
}

fn generated(kind: &str, rest: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = rest.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(CliError::usage(format!(
            "grid '{kind}:{rest}' needs lo:hi:n"
        )));
    };
    let (lo, hi) = (number(lo, rest)?, number(hi, rest)?);
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("bad point count '{}'", n.trim())))?;
    if n == 0 || n > MAX_POINTS {
        return Err(CliError::usage(format!("point count {n} outside 1..={MAX_POINTS}")));
    }
    if lo > hi {
        return Err(CliError::usage(format!("grid bounds reversed: {lo} > {hi}")));
    }
    match kind {
        "lin" => Ok((0..n)
            .map(|i| match (i, n) {
                (0, _) => lo,
                (i, n) if i == n - 1 => hi,
                (i, n) => {
                    // Weighted form: hi - lo can overflow near f64::MAX.
                    let f = i as f64 / (n - 1) as f64;
                    lo * (1.0 - f) + hi * f
                }
            })
            .collect()),
        "log" => {
            if lo <= 0.0 {
                return Err(CliError::usage("log grid needs positive bounds"));
            }
            Ok(log_grid(lo, hi, n))
        }
        other => Err(CliError::usage(format!("unknown grid kind '{other}'"))),
    }
}
