//! Rank-based significance tests: Friedman with a Conover post-hoc, and
//! the Wilcoxon signed-rank test for paired samples.

mod conover;
mod friedman;
mod wilcoxon;

pub use conover::{conover_posthoc, holm_adjust, ConoverOptions, ConoverResult};
pub use friedman::friedman_test;
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_exact_cdf, Direction, WilcoxonResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Blocks (rows) by treatments (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl RankMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if n < 2 || k < 2 {
            return Err(Error::invalid(format!("need at least 2 blocks and 2 treatments, got {n}x{k}")));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::LengthMismatch {
                what: "matrix row width",
                left: rows[r].len(),
                right: k,
            });
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("cell ({}, {}) is not finite", i / k, i % k)));
        }
        Ok(RankMatrix { rows: n, cols: k, values })
    }

    pub fn blocks(&self) -> usize {
        self.rows
    }

    pub fn treatments(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Within-block ranks (1-based, ties averaged), row-major.
    pub fn within_block_ranks(&self) -> Vec<f64> {
        (0..self.rows).flat_map(|i| average_ranks(self.row(i))).collect()
    }

    /// Column sums of the within-block ranks.
    pub fn rank_sums(&self) -> Vec<f64> {
        let ranks = self.within_block_ranks();
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| ranks[i * self.cols + j]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Degrees of freedom of the reference distribution, when it has any.
    pub df: Option<usize>,
    pub p_value: f64,
    pub alpha: f64,
    /// The statistic is undefined for this input (e.g. every block
    /// constant); `p_value` is reported as 1.
    pub degenerate: bool,
}

impl TestResult {
    pub fn significant(&self) -> bool {
        !self.degenerate && self.p_value < self.alpha
    }
}

/// 1-based ranks with ties sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j + 1) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = mean;
        }
        i = j;
    }
    ranks
}

/// `Σ (t³ - t)` over the tie groups of `values`.
pub(crate) fn tie_term(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        acc += t * t * t - t;
        i = j;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 1.0, 7.0]), vec![2.5, 2.5, 1.0, 4.0]);
        assert_eq!(average_ranks(&[2.0; 4]), vec![2.5; 4]);
        assert_eq!(tie_term(&[1.0, 1.0, 2.0, 3.0, 3.0, 3.0]), 6.0 + 24.0);
    }

    #[test]
    fn matrix_validation() {
        assert!(RankMatrix::from_rows(vec![vec![1.0, 2.0]]).is_err());
        assert!(RankMatrix::from_rows(vec![vec![1.0], vec![2.0]]).is_err());
        assert!(RankMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(RankMatrix::from_rows(vec![vec![1.0, f64::NAN], vec![1.0, 2.0]]).is_err());
        let m = RankMatrix::from_rows(vec![vec![0.3, 0.1], vec![0.2, 0.9]]).unwrap();
        assert_eq!(m.rank_sums(), vec![3.0, 3.0]);
    }
}
