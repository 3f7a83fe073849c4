use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{tie_term, RankMatrix, TestResult};

/// Tie-corrected Friedman chi-square over the treatments of `m`, compared
/// against chi-square with `k - 1` degrees of freedom.
pub fn friedman_test(m: &RankMatrix, alpha: f64) -> TestResult {
    let (n, k) = (m.blocks() as f64, m.treatments() as f64);
    let df = m.treatments() - 1;
    let sums = m.rank_sums();
    let ss: f64 = sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (n * k * (k + 1.0)) * ss - 3.0 * n * (k + 1.0);
    let ties: f64 = (0..m.blocks()).map(|i| tie_term(m.row(i))).sum();
    let correction = 1.0 - ties / (n * (k * k * k - k));
    if correction <= 1e-12 {
        return TestResult {
            statistic: 0.0,
            df: Some(df),
            p_value: 1.0,
            alpha,
            degenerate: true,
        };
    }
    // cancellation can leave a tiny negative value when there is no effect
    let statistic = (raw / correction).max(0.0);
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    TestResult {
        statistic,
        df: Some(df),
        p_value: dist.sf(statistic).clamp(0.0, 1.0),
        alpha,
        degenerate: false,
    }
}
