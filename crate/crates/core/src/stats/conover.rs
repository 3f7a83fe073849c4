use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

use super::{friedman_test, RankMatrix, TestResult, DEFAULT_ALPHA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConoverOptions {
    pub alpha: f64,
    /// Run even when the Friedman test is not significant.
    pub force: bool,
    /// Apply Holm's step-down adjustment to the pairwise p-values.
    pub holm: bool,
}

impl Default for ConoverOptions {
    fn default() -> Self {
        ConoverOptions {
            alpha: DEFAULT_ALPHA,
            force: false,
            holm: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConoverResult {
    pub friedman: TestResult,
    /// Pairwise t statistics; diagonal 0.
    pub statistics: Vec<Vec<f64>>,
    /// Symmetric two-sided p-values with a unit diagonal.
    pub p_values: Vec<Vec<f64>>,
    pub df: usize,
    pub holm: bool,
}

/// Pairwise comparisons of treatment rank sums after a Friedman test.
///
/// `t_ij = |R_i - R_j| / sqrt(2 (n A - Σ R²) / ((n - 1)(k - 1)))`, where
/// `A` is the sum of squared within-block ranks, against Student's t with
/// `(n - 1)(k - 1)` degrees of freedom. When the rank residual variance is
/// zero (every block ranks the treatments identically) any nonzero gap has
/// p = 0.
pub fn conover_posthoc(m: &RankMatrix, opts: &ConoverOptions) -> Result<ConoverResult> {
    let friedman = friedman_test(m, opts.alpha);
    if !opts.force && !friedman.significant() {
        return Err(Error::GateNotSatisfied {
            p_value: friedman.p_value,
            alpha: opts.alpha,
        });
    }
    let (n, k) = (m.blocks(), m.treatments());
    let df = (n - 1) * (k - 1);
    let ranks = m.within_block_ranks();
    let sums = m.rank_sums();
    let a: f64 = ranks.iter().map(|r| r * r).sum();
    let ss: f64 = sums.iter().map(|r| r * r).sum();
    let var = (2.0 * (n as f64 * a - ss) / df as f64).max(0.0);
    let se = var.sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");

    let mut statistics = vec![vec![0.0; k]; k];
    let mut p_values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let gap = (sums[i] - sums[j]).abs();
            let (t, p) = if gap == 0.0 {
                (0.0, 1.0)
            } else if se <= 1e-12 * gap {
                (f64::INFINITY, 0.0)
            } else {
                let t = gap / se;
                (t, (2.0 * dist.sf(t)).clamp(0.0, 1.0))
            };
            statistics[i][j] = t;
            statistics[j][i] = t;
            p_values[i][j] = p;
            p_values[j][i] = p;
        }
    }
    if opts.holm {
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        let raw: Vec<f64> = pairs.iter().map(|&(i, j)| p_values[i][j]).collect();
        for (&(i, j), p) in pairs.iter().zip(holm_adjust(&raw)) {
            p_values[i][j] = p;
            p_values[j][i] = p;
        }
    }
    Ok(ConoverResult {
        friedman,
        statistics,
        p_values,
        df,
        holm: opts.holm,
    })
}

/// Holm step-down adjusted p-values, in input order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i]).min(1.0));
        out[i] = running;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> RankMatrix {
        RankMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn noisy() -> RankMatrix {
        matrix(&[
            &[1.0, 2.0, 3.0, 4.0],
            &[2.0, 1.0, 3.0, 4.0],
            &[1.0, 3.0, 2.0, 4.0],
            &[1.0, 2.0, 4.0, 3.0],
            &[2.0, 1.0, 4.0, 3.0],
            &[1.0, 2.0, 3.0, 4.0],
        ])
    }

    #[test]
    fn structure() {
        let r = conover_posthoc(&noisy(), &ConoverOptions::default()).unwrap();
        assert_eq!(r.df, 15);
        for i in 0..4 {
            assert_eq!(r.p_values[i][i], 1.0);
            for j in 0..4 {
                assert_eq!(r.p_values[i][j], r.p_values[j][i]);
                assert!((0.0..=1.0).contains(&r.p_values[i][j]));
            }
        }
    }

    #[test]
    fn p_falls_with_rank_sum_gap() {
        // rank sums 8, 11, 19, 22
        let r = conover_posthoc(&noisy(), &ConoverOptions::default()).unwrap();
        let p = &r.p_values;
        assert!(p[0][1] > p[0][2] && p[0][2] > p[0][3]);
        assert!(p[1][2] > p[1][3]);
    }

    #[test]
    fn hand_computed_statistic() {
        let r = conover_posthoc(&noisy(), &ConoverOptions::default()).unwrap();
        // A = 6 * 30 = 180, sum R^2 = 64 + 121 + 361 + 484 = 1030
        let se = (2.0 * (6.0 * 180.0 - 1030.0) / 15.0f64).sqrt();
        assert!((r.statistics[0][3] - 14.0 / se).abs() < 1e-12);
    }

    #[test]
    fn constant_ranks_order_the_gaps() {
        let m = matrix(&[&[1.0, 2.0, 3.0][..]; 4]);
        let r = conover_posthoc(&m, &ConoverOptions::default()).unwrap();
        // zero residual variance: both gaps are infinitely significant
        assert!(r.p_values[0][2] <= r.p_values[0][1]);
        assert_eq!(r.p_values[0][1], 0.0);
    }

    #[test]
    fn identical_columns_have_unit_p() {
        let m = matrix(&[
            &[1.0, 1.0, 3.0],
            &[2.0, 2.0, 5.0],
            &[1.0, 1.0, 0.0],
            &[4.0, 4.0, 9.0],
            &[0.0, 0.0, 1.0],
        ]);
        let r = conover_posthoc(&m, &ConoverOptions { force: true, ..Default::default() }).unwrap();
        assert_eq!(r.p_values[0][1], 1.0);
    }

    #[test]
    fn gate() {
        let flat = matrix(&[&[1.0, 2.0], &[2.0, 1.0], &[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            conover_posthoc(&flat, &ConoverOptions::default()),
            Err(Error::GateNotSatisfied { .. })
        ));
        assert!(conover_posthoc(&flat, &ConoverOptions { force: true, ..Default::default() }).is_ok());
    }

    #[test]
    fn holm_examples() {
        let adj = holm_adjust(&[0.01, 0.04, 0.03]);
        assert!((adj[0] - 0.03).abs() < 1e-15);
        assert!((adj[2] - 0.06).abs() < 1e-15);
        assert!((adj[1] - 0.06).abs() < 1e-15);
        assert_eq!(holm_adjust(&[0.9, 0.8]), vec![1.0, 1.0]);
        let r = conover_posthoc(&noisy(), &ConoverOptions { holm: true, ..Default::default() }).unwrap();
        let raw = conover_posthoc(&noisy(), &ConoverOptions::default()).unwrap();
        assert!(r.p_values[0][3] >= raw.p_values[0][3]);
    }
}
