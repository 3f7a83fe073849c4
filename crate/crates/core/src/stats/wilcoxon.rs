use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::{average_ranks, tie_term, TestResult, DEFAULT_ALPHA};

/// Largest non-zero pair count handled by exact enumeration.
pub const EXACT_LIMIT: usize = 25;
const MIN_PAIRS: usize = 5;

/// Which sample tends to be larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    AGreater,
    BGreater,
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `statistic` is `min(W+, W-)`.
    pub test: TestResult,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub exact: bool,
    pub direction: Direction,
}

/// Two-sided Wilcoxon signed-rank test on `a - b`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            what: "paired samples",
            left: a.len(),
            right: b.len(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::Degenerate("all paired differences are zero".into()));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("paired differences must be finite"));
    }
    let n = diffs.len();
    if n < MIN_PAIRS {
        return Err(Error::invalid(format!(
            "need at least {MIN_PAIRS} non-zero differences, got {n}"
        )));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let w = w_plus.min(w_minus);

    let exact = n <= EXACT_LIMIT;
    let p_value = if exact {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        (2.0 * wilcoxon_exact_cdf(&doubled, (2.0 * w).round() as usize)).min(1.0)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&abs) / 48.0;
        if var <= 0.0 {
            1.0
        } else {
            let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            (2.0 * normal.sf(z)).min(1.0)
        }
    };
    let direction = match w_plus.total_cmp(&w_minus) {
        std::cmp::Ordering::Greater => Direction::AGreater,
        std::cmp::Ordering::Less => Direction::BGreater,
        std::cmp::Ordering::Equal => Direction::Balanced,
    };
    Ok(WilcoxonResult {
        test: TestResult {
            statistic: w,
            df: None,
            p_value,
            alpha: DEFAULT_ALPHA,
            degenerate: false,
        },
        w_plus,
        w_minus,
        n,
        exact,
        direction,
    })
}

/// `P(W+ <= w)` under the null, where every sign pattern over the given
/// doubled (hence integral) ranks is equally likely. Counted by dynamic
/// programming over achievable sums.
pub fn wilcoxon_exact_cdf(doubled_ranks: &[usize], w_doubled: usize) -> f64 {
    let max: usize = doubled_ranks.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let total = 2f64.powi(doubled_ranks.len() as i32);
    counts[..=w_doubled.min(max)].iter().sum::<f64>() / total
}
