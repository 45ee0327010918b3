//! Command-line driver for the whole pipeline.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or validation
//! errors. Every subcommand accepts `--config FILE`, a `key=value` file whose
//! keys are flag names (with `_` or `-`); flags given on the command line win.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ensemble::{load_any, save_any, split_holdout, train_ensemble, SavedModel, DEFAULT_HOLDOUT_FRACTION};
use crate::eval::{
    compare_models, k_fold_cv, metrics, write_comparison_table, AccuracyKind, Learner, Trainer,
    DEFAULT_BAND,
};
use crate::exact::{train as train_exact, TrainConfig};
use crate::features::{correlate_with_target, second_order_analysis, select_features};
use crate::hist::{train_hist, LeafWiseConfig};
use crate::ingest::{
    aggregate_by_day, filter_operating_days, parse_daily_csv, parse_minutely_csv, split_by_month,
    to_matrix, write_daily_csv, write_partial_daily_csv, ColumnSchema, DailyRecord, RowPolicy,
    SYSTEM_DAILY_COOLING,
};
use crate::kv::parse_kv;
use crate::matrix::DataMatrix;
use crate::parallel::threads_from_env;

#[derive(Parser, Debug)]
#[command(name = "boostfuse", version, about = "Boosted-tree energy forecasting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a daily CSV (or aggregate a minutely one) into canonical CSV.
    Ingest(IngestArgs),
    /// Pearson correlation report and feature ranking.
    Analyze(AnalyzeArgs),
    /// Train a model and write its JSON document.
    Train(TrainArgs),
    /// Predict every row of a CSV.
    Predict(PredictArgs),
    /// Score a model on labelled data.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation report.
    Cv(CvArgs),
    /// Train all three learners and tabulate accuracy, memory and time.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Canonical output (all kept records).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `canonical=header` alias table.
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// Input holds minutely gateway readings; aggregate them per day.
    #[arg(long)]
    minutely: bool,
    /// Keep only days with nonzero cooling output.
    #[arg(long)]
    filter_operating: bool,
    /// Drop bad rows instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Calendar month (1-12) for the training split.
    #[arg(long, requires = "test_month")]
    train_month: Option<u32>,
    #[arg(long, requires = "train_month")]
    test_month: Option<u32>,
    #[arg(long, requires = "train_month")]
    train_out: Option<PathBuf>,
    #[arg(long, requires = "test_month")]
    test_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    #[arg(long, default_value = SYSTEM_DAILY_COOLING)]
    target: String,
    /// Comma-separated feature names.
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    /// File listing feature names, one per line.
    #[arg(long)]
    features_file: Option<PathBuf>,
    #[arg(long)]
    aliases: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    data_args: DataArgs,
    /// Number of features to select.
    #[arg(long, default_value_t = 9)]
    top: usize,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Selected feature names, one per line.
    #[arg(long)]
    selected_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LearnerKind {
    Exact,
    Hist,
    Ensemble,
}

#[derive(Args, Debug, Clone)]
struct HyperArgs {
    #[arg(long, default_value_t = 7)]
    num_trees: usize,
    #[arg(long, default_value_t = 0.3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    l2_penalty: f64,
    #[arg(long, default_value_t = 0.0)]
    leaf_penalty: f64,
    /// 0 means unlimited.
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    zero_base_score: bool,
    #[arg(long, default_value_t = 31)]
    max_leaves: usize,
    #[arg(long, default_value_t = 255)]
    bins: usize,
    #[arg(long)]
    histogram_subtraction: bool,
}

impl HyperArgs {
    fn exact(&self) -> TrainConfig {
        TrainConfig {
            num_trees: self.num_trees,
            learning_rate: self.learning_rate,
            l2_penalty: self.l2_penalty,
            leaf_penalty: self.leaf_penalty,
            max_depth: if self.max_depth == 0 {
                TrainConfig::UNLIMITED_DEPTH
            } else {
                self.max_depth
            },
            min_samples_leaf: self.min_samples_leaf,
            seed: self.seed,
            zero_base_score: self.zero_base_score,
        }
    }

    fn hist(&self) -> LeafWiseConfig {
        LeafWiseConfig {
            base: self.exact(),
            max_leaves: self.max_leaves,
            bin_count: self.bins,
            histogram_subtraction: self.histogram_subtraction,
        }
    }

    fn learner(&self, kind: LearnerKind) -> Learner {
        match kind {
            LearnerKind::Exact => Learner::Exact(self.exact()),
            LearnerKind::Hist => Learner::Hist(self.hist()),
            LearnerKind::Ensemble => Learner::Ensemble {
                exact: self.exact(),
                hist: self.hist(),
            },
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, value_enum, default_value = "ensemble")]
    learner: LearnerKind,
    #[arg(long)]
    train: PathBuf,
    /// Holdout for fusion weights; defaults to the last 20% of training rows.
    #[arg(long)]
    holdout: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    data_args: DataArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    aliases: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = SYSTEM_DAILY_COOLING)]
    target: String,
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// Accuracy band as a fraction of |actual|.
    #[arg(long, default_value_t = DEFAULT_BAND)]
    band: f64,
    /// Metrics JSON document.
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Actual and predicted series, ordered by date.
    #[arg(long)]
    series_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    data_args: DataArgs,
    #[arg(long, value_enum, default_value = "exact")]
    learner: LearnerKind,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    cv_seed: u64,
    #[arg(long, default_value_t = DEFAULT_BAND)]
    band: f64,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Per-fold metrics CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full result as JSON.
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AccuracyArg {
    R2,
    Band,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    data_args: DataArgs,
    #[arg(long, value_enum, default_value = "r2")]
    accuracy: AccuracyArg,
    #[arg(long, default_value_t = DEFAULT_BAND)]
    band: f64,
    #[command(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Runs the CLI and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = threads_from_env() {
        // fails harmlessly if a global pool already exists
        #[cfg(feature = "parallel")]
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        #[cfg(not(feature = "parallel"))]
        let _ = n;
    }
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

/// Appends `--key value` pairs from a `--config FILE` for every key not
/// already given on the command line. `true`/`false` values toggle switches.
fn expand_config(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(pos) = strs.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = if let Some(v) = strs[pos].strip_prefix("--config=") {
        v.to_string()
    } else {
        strs.get(pos + 1)
            .cloned()
            .context("--config needs a file argument")?
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let given: Vec<String> = strs
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut out = argv;
    for (key, value) in parse_kv(&text)? {
        let flag = key.replace('_', "-");
        if flag == "config" || given.contains(&flag) {
            continue;
        }
        match value.as_str() {
            "true" => out.push(format!("--{flag}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{flag}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Analyze(a) => analyze(a),
        Command::Train(a) => train_cmd(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Cv(a) => cv(a),
        Command::Compare(a) => compare(a),
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn schema(aliases: &Option<PathBuf>) -> anyhow::Result<ColumnSchema> {
    match aliases {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading aliases {}", p.display()))?;
            Ok(ColumnSchema::from_kv(&text)?)
        }
        None => Ok(ColumnSchema::new()),
    }
}

fn read_daily(path: &Path, aliases: &Option<PathBuf>) -> anyhow::Result<Vec<DailyRecord>> {
    parse_daily_csv(open(path)?, &schema(aliases)?, RowPolicy::Strict)
        .with_context(|| format!("parsing {}", path.display()))
}

fn ingest(a: IngestArgs) -> anyhow::Result<()> {
    let schema = schema(&a.aliases)?;
    let policy = if a.lenient {
        RowPolicy::Lenient
    } else {
        RowPolicy::Strict
    };
    if a.minutely {
        let readings = parse_minutely_csv(open(&a.input)?, &schema, policy)
            .with_context(|| format!("parsing {}", a.input.display()))?;
        let days = aggregate_by_day(&readings)?;
        match &a.out {
            Some(p) => write_partial_daily_csv(&days, create(p)?)?,
            None => write_partial_daily_csv(&days, std::io::stdout().lock())?,
        }
        eprintln!("aggregated {} readings into {} days", readings.len(), days.len());
        return Ok(());
    }

    let mut records = parse_daily_csv(open(&a.input)?, &schema, policy)
        .with_context(|| format!("parsing {}", a.input.display()))?;
    let parsed = records.len();
    if a.filter_operating {
        records = filter_operating_days(&records);
    }
    eprintln!("{parsed} records parsed, {} kept", records.len());
    match &a.out {
        Some(p) => write_daily_csv(&records, create(p)?)?,
        None if a.train_month.is_none() => write_daily_csv(&records, std::io::stdout().lock())?,
        None => {}
    }
    if let (Some(tr), Some(te)) = (a.train_month, a.test_month) {
        let split = split_by_month(&records, tr, te)?;
        for w in &split.warnings {
            eprintln!("warning: {w}");
        }
        if let Some(p) = &a.train_out {
            write_daily_csv(&split.train, create(p)?)?;
        }
        if let Some(p) = &a.test_out {
            write_daily_csv(&split.test, create(p)?)?;
        }
        eprintln!("split: {} train, {} test", split.train.len(), split.test.len());
    }
    Ok(())
}

fn feature_list(d: &DataArgs, records: &[DailyRecord]) -> anyhow::Result<Vec<String>> {
    let mut names: Vec<String> = d.features.iter().map(|s| s.trim().to_string()).collect();
    if let Some(p) = &d.features_file {
        let text = std::fs::read_to_string(p)
            .with_context(|| format!("reading feature list {}", p.display()))?;
        names.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        );
    }
    names.retain(|n| !n.is_empty());
    if names.is_empty() {
        let Some(first) = records.first() else {
            bail!("no records to infer feature columns from");
        };
        names = first
            .column_names()
            .into_iter()
            .filter(|c| *c != d.target)
            .collect();
    }
    Ok(names)
}

fn load_matrix(path: &Path, d: &DataArgs) -> anyhow::Result<DataMatrix> {
    let records = read_daily(path, &d.aliases)?;
    let features = feature_list(d, &records)?;
    to_matrix(&records, &features, &d.target)
        .with_context(|| format!("building matrix from {}", path.display()))
}

fn analyze(a: AnalyzeArgs) -> anyhow::Result<()> {
    let matrix = load_matrix(&a.data, &a.data_args)?;
    let report = second_order_analysis(&matrix, &correlate_with_target(&matrix)?)?;
    let selected = select_features(&report, a.top)?;
    if let Some(p) = &a.out_csv {
        report.write_csv(create(p)?)?;
    }
    if let Some(p) = &a.out_json {
        let mut w = create(p)?;
        writeln!(w, "{}", report.to_json()?)?;
    }
    if let Some(p) = &a.selected_out {
        let mut w = create(p)?;
        for s in &selected {
            writeln!(w, "{s}")?;
        }
    }
    let mut out = std::io::stdout().lock();
    report.write_csv(&mut out)?;
    writeln!(out, "selected ({}): {}", selected.len(), selected.join(","))?;
    Ok(())
}

fn train_cmd(a: TrainArgs) -> anyhow::Result<()> {
    let train = load_matrix(&a.train, &a.data_args)?;
    let model = match a.learner {
        LearnerKind::Exact => SavedModel::Exact(train_exact(&train, &a.hyper.exact())?),
        LearnerKind::Hist => SavedModel::Hist(train_hist(&train, &a.hyper.hist())?),
        LearnerKind::Ensemble => {
            let (fit, holdout) = match &a.holdout {
                Some(p) => {
                    let mut d = a.data_args.clone();
                    d.features = train.feature_names().to_vec();
                    d.features_file = None;
                    (train.clone(), load_matrix(p, &d)?)
                }
                None => split_holdout(&train, DEFAULT_HOLDOUT_FRACTION)?,
            };
            let e = train_ensemble(&fit, &holdout, &a.hyper.exact(), &a.hyper.hist())?;
            eprintln!(
                "holdout MAE exact={} hist={}; weights exact={} hist={}",
                e.holdout_mae_exact, e.holdout_mae_hist, e.weights.w_exact, e.weights.w_hist
            );
            SavedModel::Ensemble(e)
        }
    };
    let mut w = create(&a.out)?;
    save_any(&model, &mut w)?;
    w.flush()?;
    eprintln!("wrote {} model to {}", model.kind(), a.out.display());
    Ok(())
}

fn load_saved(path: &Path) -> anyhow::Result<SavedModel> {
    load_any(open(path)?).with_context(|| format!("loading model {}", path.display()))
}

fn rows_for_model(
    model: &SavedModel,
    records: &[DailyRecord],
) -> anyhow::Result<Vec<Vec<f64>>> {
    records
        .iter()
        .map(|r| {
            model
                .feature_names()
                .iter()
                .map(|f| {
                    r.value(f)
                        .with_context(|| format!("column `{f}` missing on {}", r.date))
                })
                .collect()
        })
        .collect()
}

fn predict(a: PredictArgs) -> anyhow::Result<()> {
    let model = load_saved(&a.model)?;
    let records = read_daily(&a.data, &a.aliases)?;
    let rows = rows_for_model(&model, &records)?;
    let mut w: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(w, "date,prediction")?;
    for (r, row) in records.iter().zip(&rows) {
        writeln!(w, "{},{}", r.date, model.predict(row)?)?;
    }
    w.flush()?;
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    let model = load_saved(&a.model)?;
    let mut records = read_daily(&a.data, &a.aliases)?;
    records.sort_by_key(|r| r.date);
    let matrix = to_matrix(&records, model.feature_names(), &a.target)?;
    let preds = model.predict_matrix(&matrix)?;
    let m = metrics(&preds, matrix.target(), a.band)?;
    let doc = serde_json::json!({
        "model_kind": model.kind(),
        "rows": matrix.n_rows(),
        "band": a.band,
        "mae": m.mae,
        "rmse": m.rmse,
        "r_squared": m.r_squared,
        "r_squared_defined": m.r_squared.is_some(),
        "band_accuracy": m.band_accuracy,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    if let Some(p) = &a.metrics_out {
        let mut w = create(p)?;
        writeln!(w, "{text}")?;
    }
    if let Some(p) = &a.series_out {
        let mut w = create(p)?;
        writeln!(w, "actual,predicted")?;
        for (y, p) in matrix.target().iter().zip(&preds) {
            writeln!(w, "{y},{p}")?;
        }
        w.flush()?;
    }
    println!("{text}");
    Ok(())
}

fn cv(a: CvArgs) -> anyhow::Result<()> {
    let matrix = load_matrix(&a.data, &a.data_args)?;
    let learner = a.hyper.learner(a.learner);
    let result = k_fold_cv(&matrix, a.folds, a.cv_seed, &learner, a.band)?;
    let mut table = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut table);
        w.write_record(["fold", "rows", "mae", "rmse", "r_squared", "band_accuracy"])?;
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (i, m) in result.fold_metrics.iter().enumerate() {
            let rows = result.fold_assignment.iter().filter(|&&f| f == i).count();
            w.write_record([
                i.to_string(),
                rows.to_string(),
                m.mae.to_string(),
                m.rmse.to_string(),
                fmt_opt(m.r_squared),
                m.band_accuracy.to_string(),
            ])?;
        }
        for (label, m) in [("mean", &result.mean_metrics), ("std", &result.std_metrics)] {
            w.write_record([
                label.to_string(),
                String::new(),
                m.mae.to_string(),
                m.rmse.to_string(),
                fmt_opt(m.r_squared),
                m.band_accuracy.to_string(),
            ])?;
        }
        w.flush()?;
    }
    match &a.out {
        Some(p) => create(p)?.write_all(&table)?,
        None => std::io::stdout().write_all(&table)?,
    }
    if let Some(p) = &a.json_out {
        let mut w = create(p)?;
        writeln!(w, "{}", serde_json::to_string_pretty(&result)?)?;
    }
    Ok(())
}

fn compare(a: CompareArgs) -> anyhow::Result<()> {
    let train = load_matrix(&a.train, &a.data_args)?;
    let mut d = a.data_args.clone();
    d.features = train.feature_names().to_vec();
    d.features_file = None;
    let test = load_matrix(&a.test, &d)?;
    let learners = [
        a.hyper.learner(LearnerKind::Exact),
        a.hyper.learner(LearnerKind::Hist),
        a.hyper.learner(LearnerKind::Ensemble),
    ];
    let entries: Vec<(String, &dyn Trainer)> = learners
        .iter()
        .map(|l| (l.name().to_string(), l as &dyn Trainer))
        .collect();
    let kind = match a.accuracy {
        AccuracyArg::R2 => AccuracyKind::RSquared,
        AccuracyArg::Band => AccuracyKind::BandAccuracy,
    };
    let rows = compare_models(&entries, &train, &test, a.band, kind)?;
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            write_comparison_table(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_comparison_table(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}
