//! The `garchnet` command line: argument records and the command bodies.
//!
//! Every JSON output carries a `run_config` object with the arguments of the
//! invocation that produced it. Seeds are always explicit.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::{self, split_40_40_20, split_sizes};
use crate::error::{Error, Result};
use crate::eval::{self, EvalMetrics};
use crate::fit::{self, FitResult};
use crate::mlp::{self, BatchMode, MlpArchitecture, TrainConfig};
use crate::moments::GarchParams;
use crate::param_space::{sample_params_with, Alpha0Scale, FeatureSetKind};
use crate::scaler::{fit_scaler, ScalerParams};
use crate::simulate::{self, EmpiricalStats, DEFAULT_BURN_IN, GENERATOR};

#[derive(Debug, Parser)]
#[command(name = "garchnet", version, about = "Fit GARCH(1,1) parameters from moments with a neural network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample parameters and write a feature dataset
    GenData(GenDataArgs),
    /// Train a network on a dataset
    Train(TrainArgs),
    /// Score a model on the test partition of a dataset
    Eval(EvalArgs),
    /// Simulate a return series and estimate its statistics
    Simulate(SimulateArgs),
    /// Fit parameters to a stats file or a return series
    Fit(FitArgs),
}

pub fn run(command: &Command) -> Result<String> {
    match command {
        Command::GenData(a) => cmd_gen_data(a).map(|s| {
            format!(
                "wrote {} rows to {} (train/test/validate {}/{}/{})",
                s.rows,
                a.out.display(),
                s.split.0,
                s.split.1,
                s.split.2
            )
        }),
        Command::Train(a) => cmd_train(a).map(|s| {
            format!(
                "best epoch {} of {}, validation MSD {:.6e}; model written to {}",
                s.best_epoch,
                s.epochs_run,
                s.best_validation_msd,
                a.model_out.display()
            )
        }),
        Command::Eval(a) => cmd_eval(a).map(|m| {
            format!(
                "slope {:.4}, intercept {:.4}, test MSD {:.3e} over {} rows",
                m.slope, m.intercept, m.msd, m.n
            )
        }),
        Command::Simulate(a) => cmd_simulate(a).map(|s| {
            format!(
                "simulated {} steps: E(x^2) {:.6e}, Gamma_4 {:.4}",
                s.n_obs, s.second_moment, s.gamma4
            )
        }),
        Command::Fit(a) => cmd_fit(a).map(|r| {
            let p = r.params;
            format!(
                "alpha0 {:.6e}, alpha1 {:.6}, beta1 {:.6}{}",
                p.alpha0(),
                p.alpha1(),
                p.beta1(),
                if r.clamped { " (alpha1 clamped)" } else { "" }
            )
        }),
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn run_config<T: Serialize>(command: &str, args: &T) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    if let Value::Object(map) = &mut v {
        map.insert("command".into(), command.into());
    }
    v
}

fn read_dataset(path: &Path) -> Result<Vec<dataset::FeatureVector>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    dataset::read_csv(file).map_err(|e| match e {
        Error::Format { path: field, message } => Error::Format {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })
}

// ---------------------------------------------------------------- gen-data

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenDataArgs {
    /// Feature set: g6, g8, g10 or lag<n>
    #[arg(long)]
    pub kind: FeatureSetKind,
    /// Number of parameter triples
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    /// Seed of the 40/40/20 split summarized alongside the data [default: --seed]
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// alpha0 sampling: linear or log-uniform
    #[arg(long, default_value = "linear")]
    pub alpha0_scale: Alpha0Scale,
    /// Dataset CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Summary JSON [default: <out stem>.summary.json]
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenDataSummary {
    pub rows: usize,
    pub split: (usize, usize, usize),
    pub scaler: ScalerParams,
}

pub fn cmd_gen_data(args: &GenDataArgs) -> Result<GenDataSummary> {
    if args.count < 5 {
        return Err(Error::TooFewRows {
            needed: 5,
            got: args.count,
        });
    }
    let params = sample_params_with(args.kind, args.count, args.seed, args.alpha0_scale)?;
    let rows = dataset::build_rows(&params, args.kind)?;
    let split = split_40_40_20(&rows, args.split_seed.unwrap_or(args.seed))?;
    let scaler = fit_scaler(&split.train)?;

    let mut out = create(&args.out)?;
    dataset::write_csv(&rows, &mut out)?;
    drop(out);

    let summary = GenDataSummary {
        rows: rows.len(),
        split: split_sizes(rows.len()),
        scaler,
    };
    let json = json!({
        "rows": summary.rows,
        "train_rows": summary.split.0,
        "test_rows": summary.split.1,
        "validate_rows": summary.split.2,
        "scaler": summary.scaler,
        "run_config": run_config("gen-data", args),
    });
    let summary_path = args
        .summary_out
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".summary.json"));
    write_json(&summary_path, &json)?;
    Ok(summary)
}

// ------------------------------------------------------------------- train

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 128-2048-2048-128 hidden units, full batch, 5000 epochs
    #[default]
    Paper,
    /// 64-128-128-64 hidden units, 64-row mini-batches at lr 0.003, 1000 epochs
    Desk,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset CSV from gen-data
    #[arg(long)]
    pub data: PathBuf,
    /// Model file to write
    #[arg(long)]
    pub model_out: PathBuf,
    /// Per-epoch trace CSV [default: <model stem>.trace.csv]
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Seed for weight initialization and batch order
    #[arg(long)]
    pub seed: u64,
    /// Seed of the 40/40/20 split [default: --seed]
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Preset::Paper)]
    pub preset: Preset,
    /// Hidden layer widths, comma separated (overrides the preset)
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Rows per mini-batch (overrides the preset)
    #[arg(long, conflicts_with = "full_batch")]
    pub batch_size: Option<usize>,
    /// One update per epoch over the whole training partition
    #[arg(long)]
    pub full_batch: bool,
}

impl TrainArgs {
    pub fn architecture(&self) -> Result<MlpArchitecture> {
        match (&self.hidden, self.preset) {
            (Some(h), _) => MlpArchitecture::new(3, h.clone(), 1),
            (None, Preset::Paper) => Ok(MlpArchitecture::paper_scale()),
            (None, Preset::Desk) => Ok(MlpArchitecture::desk_scale()),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let mut c = match self.preset {
            Preset::Paper => TrainConfig {
                seed: self.seed,
                ..TrainConfig::default()
            },
            Preset::Desk => TrainConfig::desk_scale(self.seed),
        };
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.max_epochs {
            c.max_epochs = v;
        }
        if let Some(v) = self.patience {
            c.patience = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_mode = BatchMode::MiniBatch(v);
        }
        if self.full_batch {
            c.batch_mode = BatchMode::FullBatch;
        }
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub best_epoch: usize,
    pub best_validation_msd: f64,
    pub epochs_run: usize,
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainSummary> {
    let arch = args.architecture()?;
    let config = args.train_config();
    config.validate()?;
    let rows = read_dataset(&args.data)?;
    let split_seed = args.split_seed.unwrap_or(args.seed);
    let split = split_40_40_20(&rows, split_seed)?;
    let scaler = fit_scaler(&split.train)?;
    let (mut model, trace) = mlp::train(&arch, &config, &split, &scaler)?;
    model.metadata.split_seed = Some(split_seed);
    model.metadata.run_config = Some(run_config("train", args));
    mlp::save_model(&model, &args.model_out)?;

    let trace_path = args
        .trace_out
        .clone()
        .unwrap_or_else(|| with_suffix(&args.model_out, ".trace.csv"));
    trace.write_csv(create(&trace_path)?)?;
    Ok(TrainSummary {
        best_epoch: model.metadata.best_epoch,
        best_validation_msd: model.metadata.best_validation_msd,
        epochs_run: trace.epochs.len(),
    })
}

// -------------------------------------------------------------------- eval

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    #[default]
    Test,
    Train,
    Validate,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset CSV the model was trained from
    #[arg(long)]
    pub data: PathBuf,
    /// Rows to score
    #[arg(long, value_enum, default_value_t = Partition::Test)]
    pub partition: Partition,
    /// Scatter CSV of actual vs predicted alpha1
    #[arg(long)]
    pub scatter_out: PathBuf,
    /// Metrics JSON
    #[arg(long)]
    pub metrics_out: PathBuf,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalMetrics> {
    let model = mlp::load_model(&args.model)?;
    let rows = read_dataset(&args.data)?;
    let selected = match args.partition {
        Partition::All => rows,
        part => {
            let seed = model.metadata.split_seed.ok_or_else(|| {
                Error::format("metadata.split_seed", "model does not record its split seed")
            })?;
            let split = split_40_40_20(&rows, seed)?;
            match part {
                Partition::Train => split.train,
                Partition::Validate => split.validate,
                _ => split.test,
            }
        }
    };
    let pairs = eval::predict_rows(&model, &selected)?;
    let metrics = eval::metrics(&pairs)?;
    eval::write_scatter(&pairs, create(&args.scatter_out)?).map_err(|e| Error::io(&args.scatter_out, e))?;
    let json = json!({
        "kind": model.metadata.kind,
        "partition": args.partition,
        "slope": metrics.slope,
        "intercept": metrics.intercept,
        "test_msd": metrics.msd,
        "n": metrics.n,
        "best_epoch": model.metadata.best_epoch,
        "run_config": run_config("eval", args),
    });
    write_json(&args.metrics_out, &json)?;
    Ok(metrics)
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha0: f64,
    #[arg(long)]
    pub alpha1: f64,
    #[arg(long)]
    pub beta1: f64,
    /// Returns kept after burn-in
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long)]
    pub seed: u64,
    /// Autocovariance lags to estimate, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1,2,6,10")]
    pub lags: Vec<u32>,
    /// Series CSV
    #[arg(long)]
    pub out: PathBuf,
    /// Stats JSON [default: <out stem>.stats.json]
    #[arg(long)]
    pub stats_out: Option<PathBuf>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<EmpiricalStats> {
    let params = GarchParams::new(args.alpha0, args.alpha1, args.beta1)?;
    let series = simulate::simulate(&params, args.steps, args.burn_in, args.seed)?;
    let stats = simulate::estimate_stats(&series, &args.lags)?;
    simulate::write_series(&series, create(&args.out)?).map_err(|e| Error::io(&args.out, e))?;

    let mut map = stats.to_json();
    map.insert("generator".into(), GENERATOR.into());
    map.insert("run_config".into(), run_config("simulate", args));
    let stats_path = args
        .stats_out
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".stats.json"));
    write_json(&stats_path, &Value::Object(map))?;
    Ok(stats)
}

// --------------------------------------------------------------------- fit

#[derive(Debug, Clone, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["stats", "series"]))]
pub struct FitArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Stats JSON, as written by simulate
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Return series CSV; statistics are estimated first
    #[arg(long)]
    pub series: Option<PathBuf>,
    /// Also run the exact solver and report its roots
    #[arg(long)]
    pub oracle: bool,
    /// Result JSON
    #[arg(long)]
    pub out: PathBuf,
}

fn load_stats(args: &FitArgs, kind: FeatureSetKind) -> Result<EmpiricalStats> {
    if let Some(path) = &args.stats {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e))?;
        return EmpiricalStats::from_json(&value).map_err(|e| match e {
            Error::Format { path: field, message } => Error::Format {
                path: format!("{}: {field}", path.display()),
                message,
            },
            other => other,
        });
    }
    let path = args.series.as_ref().expect("clap requires a source");
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let series = simulate::read_series(file)?;
    let lags: Vec<u32> = match kind {
        FeatureSetKind::AutocovLag(n) => vec![n],
        _ => vec![],
    };
    simulate::estimate_stats(&series, &lags)
}

fn params_json(p: &GarchParams) -> Value {
    json!({ "alpha0": p.alpha0(), "alpha1": p.alpha1(), "beta1": p.beta1() })
}

fn oracle_json(stats: &EmpiricalStats, kind: FeatureSetKind) -> Value {
    match fit::solve_exact_all(stats, kind) {
        Ok(roots) => {
            let status = match roots.len() {
                0 => "no-root",
                1 => "unique",
                _ => "ambiguous",
            };
            json!({ "status": status, "roots": roots.iter().map(params_json).collect::<Vec<_>>() })
        }
        Err(e) => json!({ "status": "error", "error": e.to_string(), "roots": [] }),
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitResult> {
    let model = mlp::load_model(&args.model)?;
    let kind = model.metadata.kind;
    let stats = load_stats(args, kind)?;
    let result = fit::fit(&model, &stats)?;

    let Value::Object(mut map) = serde_json::to_value(&result).expect("fit result serializes") else {
        unreachable!("fit result is an object")
    };
    if args.oracle {
        map.insert("oracle".into(), oracle_json(&stats, kind));
    }
    map.insert("stats".into(), Value::Object(stats.to_json()));
    map.insert("run_config".into(), run_config("fit", args));
    write_json(&args.out, &Value::Object(map))?;
    Ok(result)
}

/// Parses `argv` and runs it, returning the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(message) => {
            println!("{message}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

