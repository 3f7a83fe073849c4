use std::cmp::Ordering;

use rand::Rng;

use crate::dataset::{LabeledDataset, SampleIndexSet};
use crate::error::{Error, Result};
use crate::rng::Seed;

use super::SamplingParams;

/// Uniform sampling without replacement.
pub fn sample_random(ds: &LabeledDataset, p: &SamplingParams) -> Result<SampleIndexSet> {
    p.check_target(ds.len())?;
    let mut rng = p.seed.rng();
    let picked = rand::seq::index::sample(&mut rng, ds.len(), p.target_n).into_vec();
    Ok(SampleIndexSet::from_unsorted(picked))
}

/// Weighted sampling without replacement (Efraimidis–Spirakis keys
/// `ln(u) / w`). Zero-weight items are only drawn once every positive
/// weight is exhausted, and then uniformly among themselves.
pub fn weighted_sample_without_replacement(weights: &[f64], k: usize, seed: Seed) -> Result<SampleIndexSet> {
    if k > weights.len() {
        return Err(Error::TooManyRequested {
            requested: k,
            available: weights.len(),
        });
    }
    if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid(format!("weight {i} is negative or non-finite")));
    }
    let mut rng = seed.rng();
    // (primary key, tie key, index); larger is better
    let mut keys: Vec<(f64, f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            // u in (0, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            if w > 0.0 {
                (u.ln() / w, 0.0, i)
            } else {
                (f64::NEG_INFINITY, u, i)
            }
        })
        .collect();
    if k == 0 {
        return Ok(SampleIndexSet::default());
    }
    let better = |a: &(f64, f64, usize), b: &(f64, f64, usize)| -> Ordering {
        b.0.total_cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then(a.2.cmp(&b.2))
    };
    if k < keys.len() {
        keys.select_nth_unstable_by(k - 1, better);
        keys.truncate(k);
    }
    Ok(SampleIndexSet::from_unsorted(keys.into_iter().map(|(_, _, i)| i).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PointSet;

    fn line(n: usize) -> LabeledDataset {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        LabeledDataset::unlabeled(PointSet::new(xs.clone(), xs).unwrap())
    }

    #[test]
    fn zero_and_full() {
        let ds = line(20);
        assert!(sample_random(&ds, &SamplingParams::new(0, 1)).unwrap().is_empty());
        assert_eq!(sample_random(&ds, &SamplingParams::new(20, 1)).unwrap(), SampleIndexSet::all(20));
        assert!(sample_random(&ds, &SamplingParams::new(21, 1)).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = line(1000);
        let a = sample_random(&ds, &SamplingParams::new(50, 9)).unwrap();
        let b = sample_random(&ds, &SamplingParams::new(50, 9)).unwrap();
        let c = sample_random(&ds, &SamplingParams::new(50, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 50);
    }

    #[test]
    fn weighted_respects_zero_weights() {
        let w = [0.0, 1.0, 0.0, 2.0, 0.0];
        let s = weighted_sample_without_replacement(&w, 2, Seed(3)).unwrap();
        assert_eq!(s.as_slice(), &[1, 3]);
        let s = weighted_sample_without_replacement(&w, 4, Seed(3)).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.contains(1) && s.contains(3));
    }

    #[test]
    fn weighted_frequencies_follow_weights() {
        // inclusion probability of a single draw is proportional to weight
        let w = [1.0, 3.0];
        let hits = (0..4000)
            .filter(|&s| weighted_sample_without_replacement(&w, 1, Seed(s)).unwrap().contains(1))
            .count();
        let frac = hits as f64 / 4000.0;
        assert!((frac - 0.75).abs() < 0.03, "{frac}");
    }
}
