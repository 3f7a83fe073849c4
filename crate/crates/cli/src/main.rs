use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use scatter_sampling::harness::{self, LadderSpec, QuestionKind};
use scatter_sampling::io::{self, RenderOptions};
use scatter_sampling::metrics::{self, DensityQuestion};
use scatter_sampling::outliers::{ground_truth_outliers, outliers_in_sample, GroundTruthParams};
use scatter_sampling::stats::{self, ConoverOptions, RankMatrix};
use scatter_sampling::{sample, LabeledDataset, SampleIndexSet, SamplingParams, Seed, StrategyId};

/// Sampling strategies for multi-class scatterplots.
#[derive(Parser)]
#[command(name = "scatsample", version)]
struct Cli {
    /// Seed for every random decision.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file; standard output when omitted.
    #[arg(long, visible_alias = "output", global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Test {
    Friedman,
    Conover,
    Wilcoxon,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample. Writes a CSV subset when --out ends in .csv,
    /// otherwise one index per line.
    Sample {
        #[arg(long, value_parser = parse_strategy)]
        strategy: StrategyId,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        rate_tolerance: f64,
    },
    /// Render a scatterplot as SVG.
    Render {
        #[arg(long)]
        input: PathBuf,
        /// Index list selecting the points to draw.
        #[arg(long)]
        indices: Option<PathBuf>,
        /// Draw every point in dark grey.
        #[arg(long)]
        mono: bool,
        #[arg(long, default_value_t = 1000)]
        canvas: u32,
        #[arg(long, default_value_t = 3)]
        radius: u32,
    },
    /// Ground-truth outliers as JSON.
    Outliers {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        k_lof: usize,
        #[arg(long, default_value_t = 10)]
        k_pur: usize,
        #[arg(long, default_value_t = 0.5)]
        lof_thresh: f64,
        #[arg(long, default_value_t = 0.8)]
        purity_thresh: f64,
    },
    /// Quality metrics of a sample as JSON.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        indices: PathBuf,
        /// Questions file produced by `questions`.
        #[arg(long)]
        questions: Option<PathBuf>,
        #[arg(long, default_value_t = metrics::DEFAULT_KDE_BANDWIDTH)]
        bandwidth: f64,
    },
    /// Generate density questions as JSON.
    Questions {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_enum, default_value = "region")]
        kind: Kind,
        #[arg(long, default_value_t = 0.2)]
        margin: f64,
    },
    /// Print the sampling-size ladder for a dataset size.
    Ladder {
        #[arg(long, default_value_t = 500)]
        base: usize,
        #[arg(long, default_value_t = 1.5)]
        factor: f64,
        #[arg(long, default_value_t = 7)]
        levels: usize,
        #[arg(long, default_value_t = 0.5)]
        cutoff: f64,
        #[arg(long)]
        size: usize,
    },
    /// Run a benchmark config (TOML or JSON) and write the JSON report.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Significance tests on a CSV matrix (rows are blocks, columns are
    /// treatments; wilcoxon takes exactly two columns).
    Stats {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(value_enum)]
        test: Test,
        #[arg(long, default_value_t = stats::DEFAULT_ALPHA)]
        alpha: f64,
        /// Run the post-hoc test even without a significant Friedman result.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        holm: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Region,
    Class,
}

fn parse_strategy(s: &str) -> Result<StrategyId, String> {
    s.parse().map_err(|e: scatter_sampling::Error| e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn load(path: &Path) -> Result<LabeledDataset> {
    io::load_csv(path).with_context(|| format!("loading {}", path.display()))
}

type Matrix = (Option<Vec<String>>, Vec<Vec<f64>>);

/// Numeric CSV matrix with an optional header row.
fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut header = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match cells.iter().map(|c| c.parse::<f64>()).collect::<Result<Vec<f64>, _>>() {
            Ok(r) => rows.push(r),
            Err(_) if header.is_none() && rows.is_empty() => {
                header = Some(cells.iter().map(|c| c.to_string()).collect());
            }
            Err(e) => bail!("{}: line {}: {e}", path.display(), i + 1),
        }
    }
    Ok((header, rows))
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let seed = Seed(cli.seed);
    match cli.command {
        Command::Sample { strategy, n, input, rate_tolerance } => {
            let ds = load(&input)?;
            let params = SamplingParams {
                rate_tolerance,
                ..SamplingParams::new(n, seed)
            };
            let set = sample(strategy, &ds, &params)?;
            match out {
                Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
                    io::write_csv(p, &ds, Some(&set))?
                }
                Some(p) => io::write_indices(p, &set)?,
                None => {
                    let text: String = set.iter().map(|i| format!("{i}\n")).collect();
                    emit(None, &text)?
                }
            }
        }
        Command::Render { input, indices, mono, canvas, radius } => {
            let ds = load(&input)?;
            let subset = indices.map(|p| io::read_indices(p, ds.len())).transpose()?;
            let opts = RenderOptions {
                canvas_px: canvas,
                point_radius_px: radius,
                monochrome: mono,
                draw_order_seed: seed,
                ..Default::default()
            };
            emit(out, &io::render_svg(&ds, subset.as_ref(), &opts)?)?;
        }
        Command::Outliers { input, k_lof, k_pur, lof_thresh, purity_thresh } => {
            let ds = load(&input)?;
            let gp = GroundTruthParams { k_lof, k_purity: k_pur, lof_thresh, purity_thresh };
            let truth = ground_truth_outliers(&ds, &gp)?;
            emit_json(out, &json!({ "n": ds.len(), "params": gp, "count": truth.len(), "outliers": truth.indices, "sources": truth.sources }))?;
        }
        Command::Metrics { input, indices, questions, bandwidth } => {
            let ds = load(&input)?;
            let set = io::read_indices(&indices, ds.len())?;
            emit_json(out, &sample_metrics(&ds, &set, questions.as_deref(), bandwidth)?)?;
        }
        Command::Questions { input, count, kind, margin } => {
            let ds = load(&input)?;
            let kind = match kind {
                Kind::Region => QuestionKind::Region,
                Kind::Class => QuestionKind::Class,
            };
            emit_json(out, &harness::gen_region_questions(&ds, count, seed, kind, margin)?)?;
        }
        Command::Ladder { base, factor, levels, cutoff, size } => {
            let spec = LadderSpec { base, factor, levels, cutoff_rate: cutoff };
            let sizes = harness::sample_size_ladder(&spec, size)?;
            let line: Vec<String> = sizes.iter().map(usize::to_string).collect();
            emit(out, &format!("{}\n", line.join(" ")))?;
        }
        Command::Bench { config } => {
            let cfg = harness::load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            let mut report = harness::run_benchmark(&cfg)?.to_json()?;
            report.push('\n');
            emit(out, &report)?;
        }
        Command::Stats { matrix, test, alpha, force, holm } => {
            let (header, rows) = read_matrix(&matrix)?;
            let value = match test {
                Test::Friedman => json!(stats::friedman_test(&RankMatrix::from_rows(rows)?, alpha)),
                Test::Conover => {
                    let opts = ConoverOptions { alpha, force, holm };
                    json!(stats::conover_posthoc(&RankMatrix::from_rows(rows)?, &opts)?)
                }
                Test::Wilcoxon => {
                    if rows.iter().any(|r| r.len() != 2) {
                        bail!("wilcoxon needs exactly two columns");
                    }
                    let a: Vec<f64> = rows.iter().map(|r| r[0]).collect();
                    let b: Vec<f64> = rows.iter().map(|r| r[1]).collect();
                    let mut r = stats::wilcoxon_signed_rank(&a, &b)?;
                    r.test.alpha = alpha;
                    json!(r)
                }
            };
            emit_json(out, &json!({ "treatments": header, "result": value }))?;
        }
    }
    Ok(())
}

fn sample_metrics(ds: &LabeledDataset, set: &SampleIndexSet, questions: Option<&Path>, bandwidth: f64) -> Result<serde_json::Value> {
    let mut v = json!({ "n": ds.len(), "sample_size": set.len() });
    let gp = GroundTruthParams::default().capped_for(ds.len());
    if ds.len() > 1 {
        let truth = ground_truth_outliers(ds, &gp)?;
        v["outliers"] = json!(truth.len());
        v["preservation_ratio"] = json!(metrics::outlier_preservation_ratio(set, &truth).ok());
        if set.len() > 1 {
            let marked = outliers_in_sample(ds, set, &gp)?;
            v["outlier_detection"] = json!(metrics::precision_recall(&marked, &truth, ds.len())?);
        }
    }
    if !set.is_empty() {
        let sampled = ds.points().select(set.as_slice());
        v["kde_error"] = json!(metrics::kde_error(ds.points(), &sampled, bandwidth, metrics::DEFAULT_KDE_GRID)?);
    }
    if let Some(path) = questions {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let qs: Vec<DensityQuestion> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        v["question_accuracy"] = json!(metrics::question_accuracy(ds, set, &qs)?);
    }
    Ok(v)
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
