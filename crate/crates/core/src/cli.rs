//! Command-line front end. Every subcommand writes one JSON [`ResultDocument`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approximation::{approximate_order, default_sweep, support_length_for, sweep_with_bounds, SweepPoint};
use crate::baselines::{select_by_correlation, select_by_variance, select_random, select_rrfs, BaselineResult};
use crate::document::{BenchReport, BenchRow, Params, ResultDocument};
use crate::error::Error;
use crate::ingest::{ingest_csv, ColumnRef, IngestSpec};
use crate::matrix::DataMatrix;
use crate::selection::{
    correlation_prefilter, fraction_budget, fsd, lsfsd, variance, RankedScores, Ranking, SelectionConfig,
};
use crate::synthetic::generate_synthetic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// Feature budget: an absolute count, or a fraction of the ingested features
/// (`10%` or `0.1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Count(usize),
    Fraction(f64),
}

impl Budget {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            Budget::Count(k) => k,
            Budget::Fraction(p) => fraction_budget(p, d),
        }
    }
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fraction = if let Some(pct) = s.strip_suffix('%') {
            pct.trim().parse::<f64>().map_err(|e| e.to_string())? / 100.0
        } else if s.contains('.') {
            s.parse::<f64>().map_err(|e| e.to_string())?
        } else {
            let k: usize = s.parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
            if k == 0 {
                return Err("budget must be at least 1".into());
            }
            return Ok(Budget::Count(k));
        };
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(format!("fractional budget {s} must lie in (0, 1]"));
        }
        Ok(Budget::Fraction(fraction))
    }
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "\\t" | "tab" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character, got {s:?}")),
    }
}

fn parse_relative(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(format!("relative length {s} must lie in (0, 1]"));
    }
    Ok(r)
}

#[derive(Debug, Parser)]
#[command(name = "discrimfs", version, about = "Rank features by their resilience to the curse of dimensionality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank every feature by exact intrinsic dimension
    Rank(RankArgs),
    /// Select the lowest-dimension features by exact scores
    Select(SelectArgs),
    /// Rank features from a log-spaced support sequence
    ApproxRank(ApproxArgs),
    /// Report the maximal error ratio of the approximate ranking
    ErrorBound(ErrorBoundArgs),
    /// Run a reference selector
    Baseline(BaselineArgs),
    /// Compare all methods on a synthetic dataset with planted features
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Delimited text file with one feature per column
    input: PathBuf,
    #[arg(long, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    /// The first line holds data, not column names
    #[arg(long)]
    no_header: bool,
    /// Feature columns to use, by name or zero-based index
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Worker threads for scoring (default: available parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON document here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a flat per-feature score table
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Count (`8`) or fraction (`10%`, `0.1`) of features to mark as selected
    #[arg(long)]
    budget: Option<Budget>,
    /// Drop this many features by pairwise correlation before scoring
    #[arg(long)]
    discard_correlated: Option<usize>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long)]
    budget: Budget,
    #[arg(long)]
    discard_correlated: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct LengthArgs {
    /// Requested support-sequence length
    #[arg(long)]
    support_length: Option<usize>,
    /// Support length as a fraction of the row count
    #[arg(long, value_parser = parse_relative)]
    relative_length: Option<f64>,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    length: LengthArgs,
    #[arg(long)]
    budget: Option<Budget>,
    #[arg(long)]
    discard_correlated: Option<usize>,
    /// Also compute exact scores and the true error ratio (quadratic in rows)
    #[arg(long)]
    verify_exact: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct BoundLengthArgs {
    #[arg(long)]
    support_length: Option<usize>,
    #[arg(long, value_parser = parse_relative)]
    relative_length: Option<f64>,
    /// Relative lengths 0.01, 0.02, …, 0.20
    #[arg(long)]
    sweep: bool,
}

#[derive(Debug, Args)]
struct ErrorBoundArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    length: BoundLengthArgs,
    #[arg(long)]
    discard_correlated: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Random,
    Variance,
    Correlation,
    Rrfs,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    budget: Budget,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RRFS similarity threshold; derived from the correlation pre-filter when absent
    #[arg(long)]
    threshold: Option<f64>,
    /// Pre-filter discards used to derive the RRFS threshold (default: 10% of features)
    #[arg(long)]
    discard_correlated: Option<usize>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 10_000)]
    rows: usize,
    #[arg(long, default_value_t = 50)]
    features: usize,
    #[arg(long, default_value_t = 5)]
    planted: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to the planted count, or 10% of features when nothing is planted
    #[arg(long)]
    budget: Option<Budget>,
    #[arg(long, conflicts_with = "relative_length")]
    support_length: Option<usize>,
    #[arg(long, value_parser = parse_relative, default_value_t = 0.1)]
    relative_length: f64,
    /// Skip the quadratic exact methods
    #[arg(long)]
    skip_exact: bool,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. }
            | Error::DiscardCount { .. }
            | Error::SupportLength(_)
            | Error::Threshold(_)
            | Error::Planted { .. }
            | Error::UnknownColumn(_) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

/// Parses `argv`, runs the command and writes the document to the `--out` file or
/// `stdout`. Returns the process exit code: 0 on success, 2 for usage errors and 3 for
/// data errors.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Rank(a) => &a.output,
        Command::Select(a) => &a.output,
        Command::ApproxRank(a) => &a.output,
        Command::ErrorBound(a) => &a.output,
        Command::Baseline(a) => &a.output,
        Command::Bench(a) => &a.output,
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let output = output_args(&command);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(output.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Data(e.to_string()))?;
    let started = Instant::now();
    let mut table = String::new();
    let mut doc = pool.install(|| match &command {
        Command::Rank(a) => run_exact(&a.input, a.budget, a.discard_correlated),
        Command::Select(a) => run_exact(&a.input, Some(a.budget), a.discard_correlated),
        Command::ApproxRank(a) => run_approx(a),
        Command::ErrorBound(a) => run_error_bound(a),
        Command::Baseline(a) => run_baseline(a),
        Command::Bench(a) => run_bench(a, &mut table),
    })?;
    write!(stderr, "{table}")?;
    doc.push_timing("total", started.elapsed().as_secs_f64());

    let text = doc.to_json();
    match &output.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            writeln!(file, "{text}")?;
            file.flush()?;
        }
        None => writeln!(stdout, "{text}")?,
    }
    if let Some(path) = &output.csv {
        doc.write_scores_csv(BufWriter::new(File::create(path)?)).map_err(Failure::from)?;
    }
    Ok(())
}

fn load(input: &InputArgs) -> CliResult<(DataMatrix, f64)> {
    let started = Instant::now();
    let column_filter = input.columns.as_ref().map(|cols| {
        cols.iter()
            .map(|c| match c.parse::<usize>() {
                Ok(i) if input.no_header => ColumnRef::Index(i),
                _ => ColumnRef::Name(c.clone()),
            })
            .collect()
    });
    let spec = IngestSpec {
        path: input.input.clone(),
        has_header: !input.no_header,
        delimiter: input.delimiter,
        column_filter,
    };
    if !Path::new(&spec.path).exists() {
        return Err(Failure::Data(format!("no such file: {}", spec.path.display())));
    }
    let matrix = ingest_csv(&spec)?;
    Ok((matrix, started.elapsed().as_secs_f64()))
}

fn method_name(base: &str, discard: Option<usize>) -> String {
    match discard {
        Some(n) if n > 0 => format!("{base}c"),
        _ => base.to_string(),
    }
}

fn run_exact(input: &InputArgs, budget: Option<Budget>, discard: Option<usize>) -> CliResult<ResultDocument> {
    let (matrix, ingest_secs) = load(input)?;
    let budget = budget.map(|b| b.resolve(matrix.d()));
    let survivors = matrix.d().saturating_sub(discard.unwrap_or(0));
    let mut config = SelectionConfig::exact(budget.unwrap_or(survivors.max(1)));
    config.correlation_discard = discard;
    let started = Instant::now();
    let ranking = fsd(&matrix, &config)?;
    let params = Params { budget, discard_correlated: discard, ..Default::default() };
    let mut doc =
        ResultDocument::new(method_name("fsd", discard), params, &matrix).with_ranking(&ranking, &matrix, budget);
    doc.push_timing("ingest", ingest_secs);
    doc.push_timing("score", started.elapsed().as_secs_f64());
    Ok(doc)
}

fn run_approx(a: &ApproxArgs) -> CliResult<ResultDocument> {
    let (matrix, ingest_secs) = load(&a.input)?;
    let length = a
        .length
        .support_length
        .unwrap_or_else(|| support_length_for(a.length.relative_length.unwrap_or(0.0), matrix.n()));
    let budget = a.budget.map(|b| b.resolve(matrix.d()));
    let survivors = matrix.d().saturating_sub(a.discard_correlated.unwrap_or(0));
    let config = SelectionConfig {
        budget: budget.unwrap_or(survivors.max(1)),
        correlation_discard: a.discard_correlated,
        support_length: Some(length),
        seed: None,
        verify_exact: a.verify_exact,
    };
    let started = Instant::now();
    let (ranking, report) = lsfsd(&matrix, &config)?;
    let params = Params {
        budget,
        discard_correlated: a.discard_correlated,
        support_length: Some(length),
        relative_length: a.length.relative_length,
        support_points: Some(crate::approximation::SupportSequence::logarithmic(matrix.n(), length)?.len()),
        ..Default::default()
    };
    let mut doc = ResultDocument::new(method_name("lsfsd", a.discard_correlated), params, &matrix)
        .with_ranking(&ranking, &matrix, budget);
    doc.error_report = Some(report);
    doc.push_timing("ingest", ingest_secs);
    doc.push_timing("score", started.elapsed().as_secs_f64());
    Ok(doc)
}

fn run_error_bound(a: &ErrorBoundArgs) -> CliResult<ResultDocument> {
    let (matrix, ingest_secs) = load(&a.input)?;
    let started = Instant::now();
    let pre = correlation_prefilter(&matrix, a.discard_correlated.unwrap_or(0))?;
    let n = matrix.n();
    let relative: Vec<f64> = if a.length.sweep {
        default_sweep()
    } else if let Some(r) = a.length.relative_length {
        vec![r]
    } else {
        // a fixed length is reported with its implied relative length
        let l = a.length.support_length.unwrap_or(2);
        if l < 2 {
            return Err(Error::SupportLength(l).into());
        }
        vec![l as f64 / n as f64]
    };
    let mut sweep = sweep_with_bounds(&matrix, &pre.kept, &relative)?;
    if let Some(l) = a.length.support_length {
        // rebuild from the exact integer length rather than the rounded ratio
        let support = crate::approximation::SupportSequence::logarithmic(n, l)?;
        let bounds = crate::approximation::score_features_bounded(&matrix, &pre.kept, &support)?;
        sweep.points = vec![SweepPoint {
            relative_length: relative[0],
            requested_length: l,
            support_length: support.len(),
            max_error_ratio: crate::approximation::max_error_ratio(&bounds)?,
        }];
        sweep.bounds = vec![bounds];
        sweep.supports = vec![support];
    }
    let finest = sweep.bounds.last().expect("sweep has at least one row");
    let order = approximate_order(finest);
    let bounds: Vec<_> = order.iter().map(|&i| finest[i]).collect();
    let ranking = Ranking {
        ordered_features: bounds.iter().map(|b| b.feature_index).collect(),
        scores: RankedScores::Bounded(bounds),
        discarded_by_correlation: pre.discarded,
        last_discard_correlation: pre.last_discard_correlation,
    };
    let last = sweep.points.last().expect("sweep has at least one row");
    let params = Params {
        discard_correlated: a.discard_correlated,
        support_length: a.length.support_length,
        relative_length: a.length.relative_length,
        support_points: (!a.length.sweep).then_some(last.support_length),
        ..Default::default()
    };
    let mut doc = ResultDocument::new("error-bound", params, &matrix).with_ranking(&ranking, &matrix, None);
    doc.error_report =
        Some(crate::approximation::ErrorReport { max_error_ratio: last.max_error_ratio, true_error_ratio: None });
    doc.sweep = Some(sweep.points);
    doc.push_timing("ingest", ingest_secs);
    doc.push_timing("score", started.elapsed().as_secs_f64());
    Ok(doc)
}

fn variance_order(matrix: &DataMatrix) -> Vec<usize> {
    let variances: Vec<f64> = matrix.columns().map(variance).collect();
    let mut order: Vec<usize> = (0..matrix.d()).collect();
    order.sort_by(|&a, &b| crate::order::descending_then_index((variances[a], a), (variances[b], b)));
    order
}

/// Selected features first, then the rest in `rest` order.
fn selected_first(selected: &[usize], rest: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut order = selected.to_vec();
    order.extend(rest.into_iter().filter(|j| !selected.contains(j)));
    order
}

fn rrfs_threshold(matrix: &DataMatrix, discard: Option<usize>) -> CliResult<f64> {
    let n_c = discard.unwrap_or_else(|| fraction_budget(0.1, matrix.d()));
    correlation_prefilter(matrix, n_c)?
        .last_discard_correlation
        .ok_or_else(|| Failure::Usage("RRFS needs --threshold or a positive --discard-correlated".into()))
}

fn run_baseline(a: &BaselineArgs) -> CliResult<ResultDocument> {
    let (matrix, ingest_secs) = load(&a.input)?;
    let budget = a.budget.resolve(matrix.d());
    let started = Instant::now();
    let mut params = Params { budget: Some(budget), ..Default::default() };
    let (name, result): (&str, BaselineResult) = match a.method {
        MethodArg::Random => {
            params.seed = Some(a.seed);
            ("random", select_random(matrix.d(), budget, a.seed)?)
        }
        MethodArg::Variance => ("variance", select_by_variance(&matrix, budget)?),
        MethodArg::Correlation => ("correlation", select_by_correlation(&matrix, budget)?),
        MethodArg::Rrfs => {
            let threshold = match a.threshold {
                Some(t) => t,
                None => {
                    params.discard_correlated =
                        Some(a.discard_correlated.unwrap_or_else(|| fraction_budget(0.1, matrix.d())));
                    rrfs_threshold(&matrix, a.discard_correlated)?
                }
            };
            params.threshold = Some(threshold);
            ("rrfs", select_rrfs(&matrix, budget, threshold)?)
        }
    };
    let (order, discarded) = match a.method {
        MethodArg::Random => (selected_first(&result.selected, 0..matrix.d()), vec![]),
        MethodArg::Variance | MethodArg::Rrfs => (selected_first(&result.selected, variance_order(&matrix)), vec![]),
        MethodArg::Correlation => (result.selected.clone(), result.aux.discarded.clone()),
    };
    let mut doc = ResultDocument::new(name, params, &matrix).with_order(&order, &result.selected, &discarded, &matrix);
    doc.baseline = Some(result.aux);
    doc.push_timing("ingest", ingest_secs);
    doc.push_timing("select", started.elapsed().as_secs_f64());
    Ok(doc)
}

fn run_bench(a: &BenchArgs, table: &mut String) -> CliResult<ResultDocument> {
    use std::fmt::Write as _;
    let started = Instant::now();
    let data = generate_synthetic(a.rows, a.features, a.planted, a.seed)?;
    let matrix = &data.matrix;
    let d = matrix.d();
    let mut timing = vec![("generate".to_string(), started.elapsed().as_secs_f64())];
    let budget = match a.budget {
        Some(b) => b.resolve(d),
        None if a.planted > 0 => a.planted,
        None => fraction_budget(0.1, d),
    };
    let n_c = fraction_budget(0.1, d).min(d - 1);
    let length = a.support_length.unwrap_or_else(|| support_length_for(a.relative_length, matrix.n()));

    let mut rows = Vec::new();
    let mut row =
        |method: &str, selected: Vec<usize>, max_error: Option<f64>, secs: f64, timing: &mut Vec<(String, f64)>| {
            rows.push(BenchRow {
                method: method.to_string(),
                recall: data.recall(&selected),
                selected,
                max_error_ratio: max_error,
            });
            timing.push((method.to_string(), secs));
        };

    let mut last_discard = None;
    if !a.skip_exact {
        let t = Instant::now();
        let r = fsd(matrix, &SelectionConfig::exact(budget))?;
        row("fsd", r.selected(budget).to_vec(), None, t.elapsed().as_secs_f64(), &mut timing);
        let t = Instant::now();
        let r = fsd(matrix, &SelectionConfig::exact(budget).with_discard(n_c))?;
        last_discard = r.last_discard_correlation;
        row("fsdc", r.selected(budget).to_vec(), None, t.elapsed().as_secs_f64(), &mut timing);
    }
    let t = Instant::now();
    let (approx, report) = lsfsd(matrix, &SelectionConfig::approximate(budget, length))?;
    row(
        "lsfsd",
        approx.selected(budget).to_vec(),
        Some(report.max_error_ratio),
        t.elapsed().as_secs_f64(),
        &mut timing,
    );
    let t = Instant::now();
    let (r, rep) = lsfsd(matrix, &SelectionConfig::approximate(budget, length).with_discard(n_c))?;
    last_discard = last_discard.or(r.last_discard_correlation);
    row("lsfsdc", r.selected(budget).to_vec(), Some(rep.max_error_ratio), t.elapsed().as_secs_f64(), &mut timing);
    let t = Instant::now();
    row("random", select_random(d, budget, a.seed)?.selected, None, t.elapsed().as_secs_f64(), &mut timing);
    let t = Instant::now();
    row("variance", select_by_variance(matrix, budget)?.selected, None, t.elapsed().as_secs_f64(), &mut timing);
    let t = Instant::now();
    row("correlation", select_by_correlation(matrix, budget)?.selected, None, t.elapsed().as_secs_f64(), &mut timing);
    if let Some(threshold) = last_discard {
        let t = Instant::now();
        row("rrfs", select_rrfs(matrix, budget, threshold)?.selected, None, t.elapsed().as_secs_f64(), &mut timing);
    }

    let _ = writeln!(table, "{:<12} {:>8} {:>10}  selected", "method", "recall", "max_error");
    for r in &rows {
        let recall = r.recall.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
        let err = r.max_error_ratio.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(table, "{:<12} {:>8} {:>10}  {:?}", r.method, recall, err, r.selected);
    }

    let params = Params {
        budget: Some(budget),
        discard_correlated: Some(n_c),
        support_length: Some(length),
        relative_length: a.support_length.is_none().then_some(a.relative_length),
        seed: Some(a.seed),
        ..Default::default()
    };
    let mut doc = ResultDocument::new("bench", params, matrix).with_ranking(&approx, matrix, Some(budget));
    doc.error_report = Some(report);
    doc.bench =
        Some(BenchReport { rows: a.rows, features: d, planted: data.planted.clone(), seed: a.seed, methods: rows });
    for (phase, secs) in timing {
        doc.push_timing(&phase, secs);
    }
    Ok(doc)
}
