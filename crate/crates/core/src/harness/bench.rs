//! The strategy x dataset x seed metric sweep.
//!
//! Report layout (JSON):
//! - `datasets`: name, size, class count, ground-truth outlier count and
//!   question counts per dataset.
//! - `cells`: one entry per (dataset, size, strategy, seed) with raw
//!   metrics; undefined metrics are `null`.
//! - `summaries`: per (dataset, size, strategy) mean and 95% bootstrap
//!   interval of every metric, plus the normalized mean recall.
//! - `tests`: per metric, a Friedman test over strategies (blocks are
//!   dataset x size x seed) and, when it is significant, the Conover matrix.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, SampleIndexSet};
use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{self, DensityQuestion};
use crate::outliers::{ground_truth_outliers_with, outliers_in_sample_with, GroundTruthParams, OutlierGroundTruth};
use crate::par::Parallelism;
use crate::rng::Seed;
use crate::sampling::{sample, SamplingParams};
use crate::stats::{conover_posthoc, friedman_test, ConoverOptions, ConoverResult, RankMatrix, TestResult};
use crate::strategy::StrategyId;

use super::{
    gen_gaussian_mixture, gen_region_questions, gen_two_density, sample_size_ladder, LadderSpec, MixtureSpec,
    QuestionKind, TwoDensitySpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Csv {
        path: PathBuf,
        #[serde(default)]
        name: Option<String>,
    },
    Mixture {
        #[serde(flatten)]
        spec: MixtureSpec,
        #[serde(default)]
        name: Option<String>,
    },
    TwoDensity {
        #[serde(flatten)]
        spec: TwoDensitySpec,
        #[serde(default)]
        name: Option<String>,
    },
}

impl DatasetSpec {
    fn name(&self, index: usize) -> String {
        match self {
            DatasetSpec::Csv { name: Some(n), .. }
            | DatasetSpec::Mixture { name: Some(n), .. }
            | DatasetSpec::TwoDensity { name: Some(n), .. } => n.clone(),
            DatasetSpec::Csv { path, .. } => path
                .file_stem()
                .map_or_else(|| format!("dataset{index}"), |s| s.to_string_lossy().into_owned()),
            DatasetSpec::Mixture { spec, .. } => format!("mixture{index}_k{}_n{}", spec.classes, spec.n),
            DatasetSpec::TwoDensity { spec, .. } => format!("two_density{index}_n{}", spec.n),
        }
    }

    fn load(&self) -> Result<LabeledDataset> {
        match self {
            DatasetSpec::Csv { path, .. } => io::load_csv(path),
            DatasetSpec::Mixture { spec, .. } => gen_gaussian_mixture(spec),
            DatasetSpec::TwoDensity { spec, .. } => gen_two_density(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeSpec {
    Fixed(usize),
    /// `round(rate * N)`.
    Rate(f64),
    /// Every ladder level that survives the cutoff.
    Ladder(LadderSpec),
}

impl SizeSpec {
    fn sizes(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            SizeSpec::Fixed(k) => Ok(vec![*k]),
            SizeSpec::Rate(r) if (0.0..=1.0).contains(r) => Ok(vec![(r * n as f64).round() as usize]),
            SizeSpec::Rate(r) => Err(Error::Config(format!("rate {r} outside [0, 1]"))),
            SizeSpec::Ladder(l) => sample_size_ladder(l, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub datasets: Vec<DatasetSpec>,
    pub strategies: Vec<StrategyId>,
    pub size: SizeSpec,
    pub seeds: Vec<u64>,
    pub region_questions: usize,
    pub class_questions: usize,
    pub question_margin: f64,
    pub question_seed: u64,
    pub outliers: bool,
    pub kde: bool,
    pub ground_truth: GroundTruthParams,
    pub kde_bandwidth: f64,
    pub kde_grid: usize,
    pub rate_tolerance: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    pub alpha: f64,
    pub parallelism: Parallelism,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            datasets: Vec::new(),
            strategies: StrategyId::ALL.to_vec(),
            size: SizeSpec::Rate(0.1),
            seeds: (0..5).collect(),
            region_questions: 100,
            class_questions: 100,
            question_margin: 0.2,
            question_seed: 0,
            outliers: true,
            kde: true,
            ground_truth: GroundTruthParams::default(),
            kde_bandwidth: metrics::DEFAULT_KDE_BANDWIDTH,
            kde_grid: metrics::DEFAULT_KDE_GRID,
            rate_tolerance: 0.01,
            bootstrap_resamples: 10_000,
            bootstrap_seed: 0,
            alpha: crate::stats::DEFAULT_ALPHA,
            parallelism: Parallelism::default(),
        }
    }
}

/// Reads a TOML config, or JSON when the extension is `.json`. Relative
/// dataset paths are resolved against the config's directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<BenchmarkConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut cfg: BenchmarkConfig = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
    };
    let base = path.parent().unwrap_or(Path::new(""));
    for d in &mut cfg.datasets {
        if let DatasetSpec::Csv { path: p, .. } = d {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n: usize,
    pub classes: usize,
    pub sizes: Vec<usize>,
    pub outliers: Option<usize>,
    pub region_questions: usize,
    pub class_questions: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub region_accuracy: Option<f64>,
    pub class_accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// Recall over the largest recall of any strategy for the same
    /// dataset, size and seed.
    pub normalized_recall: Option<f64>,
    pub preservation_ratio: Option<f64>,
    pub kde_error: Option<f64>,
}

pub const METRIC_NAMES: [&str; 7] = [
    "region_accuracy",
    "class_accuracy",
    "precision",
    "recall",
    "normalized_recall",
    "preservation_ratio",
    "kde_error",
];

impl CellMetrics {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "region_accuracy" => self.region_accuracy,
            "class_accuracy" => self.class_accuracy,
            "precision" => self.precision,
            "recall" => self.recall,
            "normalized_recall" => self.normalized_recall,
            "preservation_ratio" => self.preservation_ratio,
            "kde_error" => self.kde_error,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub target_n: usize,
    pub strategy: StrategyId,
    pub seed: u64,
    pub sample_size: usize,
    pub metrics: CellMetrics,
    /// All recalls in this cell's group were zero.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub recall_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub dataset: String,
    pub target_n: usize,
    pub strategy: StrategyId,
    pub mean_sample_size: f64,
    pub metrics: BTreeMap<String, MetricSummary>,
    /// Mean recall over the largest mean recall among strategies.
    pub normalized_mean_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTest {
    pub metric: String,
    pub blocks: usize,
    pub friedman: Option<TestResult>,
    pub conover: Option<ConoverResult>,
    /// Why a test was skipped.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub strategies: Vec<StrategyId>,
    pub seeds: Vec<u64>,
    pub datasets: Vec<DatasetInfo>,
    pub cells: Vec<CellResult>,
    pub summaries: Vec<StrategySummary>,
    pub tests: Vec<MetricTest>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Prepared {
    name: String,
    ds: LabeledDataset,
    sizes: Vec<usize>,
    truth: Option<OutlierGroundTruth>,
    region: Vec<DensityQuestion>,
    class: Vec<DensityQuestion>,
    kde_field: Option<Vec<f64>>,
}

fn prepare(cfg: &BenchmarkConfig, index: usize, spec: &DatasetSpec) -> Result<Prepared> {
    let ds = spec.load()?;
    let exec = cfg.parallelism;
    let qseed = Seed(cfg.question_seed).derive(index as u64);
    let truth = if cfg.outliers && ds.len() > 1 {
        Some(ground_truth_outliers_with(&ds, &cfg.ground_truth.capped_for(ds.len()), exec)?)
    } else {
        None
    };
    let region = if cfg.region_questions > 0 {
        gen_region_questions(&ds, cfg.region_questions, qseed.derive(0), QuestionKind::Region, cfg.question_margin)?
    } else {
        Vec::new()
    };
    let class = if cfg.class_questions > 0 && ds.num_classes() >= 2 {
        gen_region_questions(&ds, cfg.class_questions, qseed.derive(1), QuestionKind::Class, cfg.question_margin)?
    } else {
        Vec::new()
    };
    let kde_field = if cfg.kde {
        Some(metrics::kde_field(ds.points(), cfg.kde_bandwidth, cfg.kde_grid, exec)?)
    } else {
        None
    };
    Ok(Prepared {
        name: spec.name(index),
        sizes: cfg.size.sizes(ds.len())?,
        ds,
        truth,
        region,
        class,
        kde_field,
    })
}

fn evaluate(cfg: &BenchmarkConfig, p: &Prepared, s: &SampleIndexSet) -> Result<CellMetrics> {
    let exec = cfg.parallelism;
    let mut m = CellMetrics::default();
    if !p.region.is_empty() {
        m.region_accuracy = Some(metrics::question_accuracy(&p.ds, s, &p.region)?);
    }
    if !p.class.is_empty() {
        m.class_accuracy = Some(metrics::question_accuracy(&p.ds, s, &p.class)?);
    }
    if let Some(truth) = &p.truth {
        let marked = outliers_in_sample_with(&p.ds, s, &cfg.ground_truth, exec)?;
        let pr = metrics::precision_recall(&marked, truth, p.ds.len())?;
        m.precision = pr.precision;
        m.recall = (!pr.empty_truth).then_some(pr.recall);
        m.preservation_ratio = metrics::outlier_preservation_ratio(s, truth).ok();
    }
    if let (Some(full), false) = (&p.kde_field, s.is_empty()) {
        let field = metrics::kde_field(&p.ds.points().select(s.as_slice()), cfg.kde_bandwidth, cfg.kde_grid, exec)?;
        m.kde_error = Some(metrics::kde_field_distance(full, &field));
    }
    Ok(m)
}

/// Mean of `values` with a percentile bootstrap interval at `level`.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, level: f64, seed: Seed) -> Result<MetricSummary> {
    if values.is_empty() {
        return Err(Error::Empty("bootstrap sample"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if resamples == 0 || n == 1 {
        return Ok(MetricSummary { mean, ci_low: mean, ci_high: mean, count: n });
    }
    let mut rng = seed.rng();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let pick = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok(MetricSummary {
        mean,
        ci_low: pick(tail),
        ci_high: pick(1.0 - tail),
        count: n,
    })
}

fn check(cfg: &BenchmarkConfig) -> Result<()> {
    if cfg.datasets.is_empty() {
        return Err(Error::Config("no datasets".into()));
    }
    if cfg.strategies.is_empty() {
        return Err(Error::Config("no strategies".into()));
    }
    if cfg.seeds.is_empty() {
        return Err(Error::Config("no seeds".into()));
    }
    let mut s = cfg.strategies.clone();
    s.sort_by_key(|id| *id as u8);
    s.dedup();
    if s.len() != cfg.strategies.len() {
        return Err(Error::Config("duplicate strategy".into()));
    }
    Ok(())
}

pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    check(cfg)?;
    let prepared: Vec<Prepared> = cfg
        .datasets
        .iter()
        .enumerate()
        .map(|(i, d)| prepare(cfg, i, d))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (d, p) in prepared.iter().enumerate() {
        for &n in &p.sizes {
            for &seed in &cfg.seeds {
                for &strategy in &cfg.strategies {
                    jobs.push((d, n, seed, strategy));
                }
            }
        }
    }
    let results: Vec<Result<CellResult>> = cfg.parallelism.map_slice(&jobs, |&(d, n, seed, strategy)| {
        let p = &prepared[d];
        let params = SamplingParams {
            rate_tolerance: cfg.rate_tolerance,
            ..SamplingParams::new(n, seed)
        };
        let s = sample(strategy, &p.ds, &params)?;
        Ok(CellResult {
            dataset: p.name.clone(),
            target_n: n,
            strategy,
            seed,
            sample_size: s.len(),
            metrics: evaluate(cfg, p, &s)?,
            recall_degenerate: false,
        })
    });
    let mut cells: Vec<CellResult> = results.into_iter().collect::<Result<_>>()?;

    // cells come in groups of |strategies| sharing (dataset, size, seed)
    for group in cells.chunks_mut(cfg.strategies.len()) {
        let recalls: Vec<f64> = group.iter().filter_map(|c| c.metrics.recall).collect();
        if recalls.len() != group.len() {
            continue;
        }
        let norm = metrics::normalized_recall(&recalls)?;
        for (c, v) in group.iter_mut().zip(norm.values) {
            c.metrics.normalized_recall = Some(v);
            c.recall_degenerate = norm.degenerate;
        }
    }

    let summaries = summarize(cfg, &prepared, &cells)?;
    let tests = METRIC_NAMES.iter().map(|m| metric_test(cfg, &cells, m)).collect();
    let datasets = prepared
        .iter()
        .map(|p| DatasetInfo {
            name: p.name.clone(),
            n: p.ds.len(),
            classes: p.ds.num_classes(),
            sizes: p.sizes.clone(),
            outliers: p.truth.as_ref().map(OutlierGroundTruth::len),
            region_questions: p.region.len(),
            class_questions: p.class.len(),
        })
        .collect();
    Ok(BenchmarkReport {
        strategies: cfg.strategies.clone(),
        seeds: cfg.seeds.clone(),
        datasets,
        cells,
        summaries,
        tests,
    })
}

fn summarize(cfg: &BenchmarkConfig, prepared: &[Prepared], cells: &[CellResult]) -> Result<Vec<StrategySummary>> {
    let k = cfg.strategies.len();
    let per_group = k * cfg.seeds.len();
    let mut out = Vec::new();
    let mut offset = 0;
    let mut boot = 0u64;
    for p in prepared {
        for &n in &p.sizes {
            let block = &cells[offset..offset + per_group];
            offset += per_group;
            let mut group = Vec::with_capacity(k);
            for (j, &strategy) in cfg.strategies.iter().enumerate() {
                let mine: Vec<&CellResult> = block.iter().skip(j).step_by(k).collect();
                let mut metrics = BTreeMap::new();
                for name in METRIC_NAMES {
                    let vals: Vec<f64> = mine.iter().filter_map(|c| c.metrics.get(name)).collect();
                    if vals.is_empty() {
                        continue;
                    }
                    let seed = Seed(cfg.bootstrap_seed).derive(boot);
                    boot += 1;
                    metrics.insert(name.to_string(), bootstrap_mean_ci(&vals, cfg.bootstrap_resamples, 0.95, seed)?);
                }
                group.push(StrategySummary {
                    dataset: p.name.clone(),
                    target_n: n,
                    strategy,
                    mean_sample_size: mine.iter().map(|c| c.sample_size as f64).sum::<f64>() / mine.len() as f64,
                    metrics,
                    normalized_mean_recall: None,
                });
            }
            let means: Option<Vec<f64>> = group.iter().map(|s| s.metrics.get("recall").map(|m| m.mean)).collect();
            if let Some(means) = means {
                let norm = metrics::normalized_recall(&means)?;
                for (s, v) in group.iter_mut().zip(norm.values) {
                    s.normalized_mean_recall = Some(v);
                }
            }
            out.extend(group);
        }
    }
    Ok(out)
}

fn metric_test(cfg: &BenchmarkConfig, cells: &[CellResult], metric: &str) -> MetricTest {
    let k = cfg.strategies.len();
    let rows: Vec<Vec<f64>> = cells
        .chunks(k)
        .filter_map(|g| g.iter().map(|c| c.metrics.get(metric)).collect::<Option<Vec<f64>>>())
        .collect();
    let blocks = rows.len();
    let skipped = |note: &str| MetricTest {
        metric: metric.to_string(),
        blocks,
        friedman: None,
        conover: None,
        note: Some(note.to_string()),
    };
    if k < 2 {
        return skipped("fewer than two strategies");
    }
    let m = match RankMatrix::from_rows(rows) {
        Ok(m) => m,
        Err(_) => return skipped("fewer than two complete blocks"),
    };
    let friedman = friedman_test(&m, cfg.alpha);
    let opts = ConoverOptions { alpha: cfg.alpha, ..Default::default() };
    let (conover, note) = match conover_posthoc(&m, &opts) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    MetricTest {
        metric: metric.to_string(),
        blocks,
        friedman: Some(friedman),
        conover,
        note,
    }
}
