//! Plug-in mutual-information estimates from joint count tables.

use std::f64::consts::LN_2;

use crate::{Error, Result};

/// Contingency table of counts, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointCounts {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
}

impl JointCounts {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            counts: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[u64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("ragged or empty count table".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            counts: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.counts[r * self.cols + c]
    }

    pub fn add(&mut self, r: usize, c: usize) {
        self.counts[r * self.cols + c] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &JointCounts) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c)).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    /// First-order (delta-method) standard error.
    pub std_error: f64,
    /// Sample size.
    pub total: u64,
    /// Occupied cells minus one; degrees of freedom of the second-order
    /// fluctuation.
    pub dof: usize,
    /// One of the marginals is concentrated on a single value.
    pub degenerate: bool,
}

impl MiEstimate {
    /// Half-width of the `sigmas`-level agreement band around the true
    /// information.
    ///
    /// The first-order term vanishes when the table is deterministic or
    /// independent; the plug-in estimate then fluctuates at second order,
    /// as `chi^2_k / (2 N ln 2)`, so the band adds `(sigmas + sqrt k)^2`, an
    /// upper bound on the matching `chi^2_k` quantile.
    pub fn band(&self, sigmas: f64) -> f64 {
        if self.total == 0 {
            return f64::INFINITY;
        }
        let k = self.dof.max(1) as f64;
        let quantile = (sigmas + k.sqrt()).powi(2);
        sigmas * self.std_error + quantile / (2.0 * self.total as f64 * LN_2)
    }

    /// Deviation from `expected`, scaled so that `|z| <= 3` exactly when the
    /// estimate lies inside `band(3.0)`.
    pub fn z_score(&self, expected: f64) -> f64 {
        let band = self.band(3.0);
        let diff = self.bits - expected;
        if diff == 0.0 {
            0.0
        } else {
            3.0 * diff / band
        }
    }
}

/// Plug-in estimate `sum p(x,y) log2 p(x,y) / (p(x) p(y))` over the observed
/// joint frequencies.
pub fn empirical_mutual_info(table: &JointCounts) -> Result<MiEstimate> {
    let total = table.total();
    if total == 0 {
        return Err(Error::Undefined("mutual information of an empty table"));
    }
    let n = total as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let occupied = table.counts.iter().filter(|&&c| c > 0).count();
    let degenerate =
        rows.iter().filter(|&&r| r > 0).count() < 2 || cols.iter().filter(|&&c| c > 0).count() < 2;
    if degenerate {
        return Ok(MiEstimate {
            bits: 0.0,
            std_error: 0.0,
            total,
            dof: occupied.saturating_sub(1),
            degenerate: true,
        });
    }
    let mut mi = 0.0;
    let mut second = 0.0;
    for r in 0..table.rows {
        for c in 0..table.cols {
            let k = table.get(r, c);
            if k == 0 {
                continue;
            }
            let p = k as f64 / n;
            let ratio = (k as f64 * n / (rows[r] as f64 * cols[c] as f64)).log2();
            mi += p * ratio;
            second += p * ratio * ratio;
        }
    }
    let var = ((second - mi * mi) / n).max(0.0);
    Ok(MiEstimate {
        bits: mi.max(0.0),
        std_error: var.sqrt(),
        total,
        dof: occupied.saturating_sub(1),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_correlated_is_one_bit() {
        let t = JointCounts::from_rows(&[&[500, 0], &[0, 500]]).unwrap();
        let e = empirical_mutual_info(&t).unwrap();
        assert!((e.bits - 1.0).abs() < 1e-15);
        assert!(!e.degenerate);
    }

    #[test]
    fn independent_uniform_is_zero() {
        let t = JointCounts::from_rows(&[&[250, 250], &[250, 250]]).unwrap();
        assert_eq!(empirical_mutual_info(&t).unwrap().bits, 0.0);
    }

    #[test]
    fn erasure_column() {
        // Half the rows erased, the rest perfectly known: 1/2 bit.
        let t = JointCounts::from_rows(&[&[100, 0, 100], &[0, 100, 100]]).unwrap();
        assert!((empirical_mutual_info(&t).unwrap().bits - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_marginal_flagged() {
        let t = JointCounts::from_rows(&[&[10, 0], &[20, 0]]).unwrap();
        let e = empirical_mutual_info(&t).unwrap();
        assert_eq!(e.bits, 0.0);
        assert!(e.degenerate);
    }

    #[test]
    fn empty_table_is_undefined() {
        assert!(empirical_mutual_info(&JointCounts::new(2, 3)).is_err());
        assert!(JointCounts::from_rows(&[&[1, 2], &[3]]).is_err());
    }

    #[test]
    fn band_is_positive_for_deterministic_table() {
        let t = JointCounts::from_rows(&[&[500, 0], &[0, 500]]).unwrap();
        let e = empirical_mutual_info(&t).unwrap();
        assert!(e.std_error < 1e-12);
        assert!(e.band(3.0) > 0.0);
        assert_eq!(e.z_score(1.0), 0.0);
    }
}
