//! `iglu` — verification suites, function evaluator, dataset generator,
//! trainer, and activation microbenchmark in one binary.
//!
//! Exit code contract: 0 iff the operation (including any verification)
//! succeeded, so the whole gate is one CI line:
//! `iglu verify all && iglu bench --smoke && iglu train --smoke`.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use iglu_cli::bench::{self, BenchProtocol, Precision};
use iglu_cli::{dataset_io, evalgrid, parse, verify};
use iglu_core::longtail::{self, LongTailConfig};
use iglu_core::trainer::{
    self, InitScheme, LossKind, LrSchedule, MlpConfig, Optimizer, SigmaSharing, SuiteConfig,
    TrainConfig,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "iglu",
    version,
    about = "Arctangent-gated activations: verification, evaluation, data, training, benchmarks",
    after_help = "Set IGLU_OUT_DIR to redirect relative output paths into a directory."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and emit its JSON report (exit 1 on failure)
    Verify(VerifyArgs),
    /// Tabulate x, f(x), f'(x), gate(x) as CSV for plotting
    Eval(EvalArgs),
    /// Dataset tools
    Data(DataArgs),
    /// Train the MLP classifier (or run the imbalance suite)
    Train(TrainArgs),
    /// Time the activation zoo, normalized to Identity
    Bench(BenchArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run
    #[arg(value_enum)]
    target: VerifyTarget,
    /// Mixture-comparison tolerance (mixture/all targets only)
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyTarget {
    Mixture,
    Grads,
    Approx,
    Limits,
    All,
}

#[derive(Args)]
struct EvalArgs {
    /// Activation token, e.g. iglu:1, iglu-approx:0.5, gelu-a:2, relu
    #[arg(long)]
    activation: String,
    /// Grid start (inclusive)
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    lo: f64,
    /// Grid end (inclusive)
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    hi: f64,
    /// Number of grid points (>= 2, endpoints included)
    #[arg(long, default_value_t = 201)]
    steps: usize,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    #[command(subcommand)]
    cmd: DataCmd,
}

#[derive(Subcommand)]
enum DataCmd {
    /// Generate a long-tailed synthetic dataset as <out>.train.csv / <out>.test.csv
    Gen(DataGenArgs),
}

#[derive(Args)]
struct DataGenArgs {
    /// Number of classes K (>= 2)
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Samples in the most frequent class
    #[arg(long, default_value_t = 200)]
    nmax: usize,
    /// Imbalance ratio n_max / n_min (>= 1)
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    /// Feature dimension
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum pairwise distance between class means
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    /// Balanced test split: samples per class
    #[arg(long, default_value_t = 50)]
    test_per_class: usize,
    /// Output path prefix
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(subcommand)]
    suite: Option<TrainSub>,

    /// Hidden activation token (append :learnable for trainable sigma)
    #[arg(long, default_value = "iglu:1")]
    activation: String,
    /// Hidden layer sizes, comma separated
    #[arg(long, default_value = "32")]
    hidden: String,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 1e-2)]
    weight_decay: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adamw)]
    optimizer: OptimizerArg,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Cosine)]
    schedule: ScheduleArg,
    #[arg(long, value_enum, default_value_t = LossArg::Ce)]
    loss: LossArg,
    #[arg(long, value_enum, default_value_t = SharingArg::PerLayer)]
    sigma_sharing: SharingArg,
    #[arg(long, value_enum, default_value_t = InitArg::FanIn)]
    init: InitArg,
    /// Model init seed
    #[arg(long, default_value_t = 5)]
    model_seed: u64,
    /// Shuffle seed
    #[arg(long, default_value_t = 11)]
    seed: u64,

    /// Load data from <prefix>.train.csv / <prefix>.test.csv instead of
    /// generating it
    #[arg(long)]
    data: Option<PathBuf>,
    /// Synthetic data: number of classes
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Synthetic data: samples in the most frequent class
    #[arg(long, default_value_t = 150)]
    nmax: usize,
    /// Synthetic data: imbalance ratio
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    /// Synthetic data: feature dimension
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Synthetic data: generator seed
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// Synthetic data: class-mean separation
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    /// Synthetic data: balanced test samples per class
    #[arg(long, default_value_t = 50)]
    test_per_class: usize,

    /// Tiny preset (2-class blobs, 6 epochs) for smoke testing
    #[arg(long)]
    smoke: bool,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TrainSub {
    /// Imbalance study: activations x ratios, weighted-CE training,
    /// balanced-test evaluation, CSV grid out
    Suite(SuiteArgs),
}

#[derive(Args)]
struct SuiteArgs {
    /// Comma-separated imbalance ratios
    #[arg(long, default_value = "10,100")]
    ratios: String,
    /// Comma-separated activation tokens
    #[arg(long, default_value = "iglu:0.5,iglu-approx:0.5,relu,gelu-tanh")]
    activations: String,
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 150)]
    nmax: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    #[arg(long, default_value_t = 40)]
    test_per_class: usize,
    /// Hidden layer sizes, comma separated
    #[arg(long, default_value = "24")]
    hidden: String,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 3e-3)]
    lr: f64,
    #[arg(long, default_value_t = 1e-2)]
    weight_decay: f64,
    #[arg(long, default_value_t = 5)]
    model_seed: u64,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Write the CSV grid here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Input dimension
    #[arg(long, default_value_t = 10_000)]
    dim: usize,
    /// Timed iterations per activation and direction
    #[arg(long, default_value_t = 1_000)]
    iters: usize,
    /// Untimed warmup iterations
    #[arg(long, default_value_t = 50)]
    warmup: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated activation tokens; must include identity
    #[arg(
        long,
        default_value = "identity,relu,gelu,gelu-tanh,silu,mish,hardswish,iglu:1,iglu-approx:1"
    )]
    zoo: String,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Single)]
    precision: PrecisionArg,
    /// Write the machine-readable JSON sidecar here
    #[arg(long)]
    json: Option<PathBuf>,
    /// Quick preset (1000-dim input, 100 iterations)
    #[arg(long)]
    smoke: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Sgd,
    Adamw,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Constant,
    Cosine,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Ce,
    WeightedCe,
}

#[derive(Clone, Copy, ValueEnum)]
enum SharingArg {
    PerLayer,
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    FanIn,
    NegativeBias,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Single,
    Double,
}

/// Relative output paths honor the optional IGLU_OUT_DIR override.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("IGLU_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let path = resolve_out(path);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"), // the payload carries its own trailing newline
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<bool> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    if let Some(path) = out {
        let path = resolve_out(path);
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Verify(args) => run_verify(args),
        Cmd::Eval(args) => {
            let act = parse::parse_activation(&args.activation)?;
            let csv = evalgrid::eval_csv(&act, args.lo, args.hi, args.steps)?;
            emit(&csv, args.out.as_deref())?;
            Ok(true)
        }
        Cmd::Data(args) => match args.cmd {
            DataCmd::Gen(g) => run_data_gen(g),
        },
        Cmd::Train(args) => match args.suite {
            Some(TrainSub::Suite(s)) => run_suite(s),
            None => run_train(args),
        },
        Cmd::Bench(args) => run_bench_cmd(args),
    }
}

fn run_verify(args: VerifyArgs) -> Result<bool> {
    let out = args.out.as_deref();
    match args.target {
        VerifyTarget::Mixture => {
            let report = verify::verify_mixture(args.tol)?;
            emit_json(&report, out)?;
            Ok(report.passed)
        }
        VerifyTarget::Grads => {
            let report = verify::verify_grads()?;
            emit_json(&report, out)?;
            Ok(report.passed)
        }
        VerifyTarget::Approx => {
            let report = verify::verify_approx();
            emit_json(&report, out)?;
            Ok(report.passed)
        }
        VerifyTarget::Limits => {
            let report = verify::verify_limits();
            emit_json(&report, out)?;
            Ok(report.passed)
        }
        VerifyTarget::All => {
            let report = verify::verify_all(args.tol)?;
            emit_json(&report, out)?;
            Ok(report.passed)
        }
    }
}

#[derive(Serialize)]
struct DataGenSummary {
    schema: &'static str,
    train_path: PathBuf,
    test_path: PathBuf,
    counts: Vec<usize>,
}

fn run_data_gen(args: DataGenArgs) -> Result<bool> {
    let cfg = LongTailConfig {
        num_classes: args.classes,
        max_count: args.nmax,
        imbalance_ratio: args.ratio,
        feature_dim: args.dim,
        seed: args.seed,
        class_separation: args.separation,
        test_per_class: args.test_per_class,
    };
    let counts = longtail::class_counts(&cfg)?;
    let (train, test) = longtail::generate(&cfg)?;
    let prefix = resolve_out(&args.out);
    let (train_path, test_path) = dataset_io::write_split_pair(&prefix, &train, &test)?;
    emit_json(
        &DataGenSummary { schema: "iglu.datagen.v1", train_path, test_path, counts },
        None,
    )?;
    Ok(true)
}

fn parse_hidden(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().context("bad hidden layer size"))
        .collect()
}

fn train_config_from(args: &TrainArgs) -> TrainConfig {
    TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.lr,
        weight_decay: args.weight_decay,
        optimizer: match args.optimizer {
            OptimizerArg::Sgd => Optimizer::Sgd,
            OptimizerArg::Adamw => Optimizer::AdamW,
        },
        lr_schedule: match args.schedule {
            ScheduleArg::Constant => LrSchedule::Constant,
            ScheduleArg::Cosine => LrSchedule::Cosine,
        },
        loss: match args.loss {
            LossArg::Ce => LossKind::CrossEntropy,
            LossArg::WeightedCe => LossKind::WeightedCrossEntropy,
        },
        seed: args.seed,
    }
}

fn run_train(mut args: TrainArgs) -> Result<bool> {
    if args.smoke {
        args.epochs = 6;
        args.classes = 2;
        args.nmax = 120;
        args.dim = 6;
        args.hidden = "12".to_string();
        args.test_per_class = 40;
    }
    let (train_data, test_data) = match &args.data {
        Some(prefix) => {
            let mut train_path = prefix.as_os_str().to_owned();
            train_path.push(".train.csv");
            let mut test_path = prefix.as_os_str().to_owned();
            test_path.push(".test.csv");
            (
                dataset_io::read_dataset(Path::new(&train_path))?,
                dataset_io::read_dataset(Path::new(&test_path))?,
            )
        }
        None => longtail::generate(&LongTailConfig {
            num_classes: args.classes,
            max_count: args.nmax,
            imbalance_ratio: args.ratio,
            feature_dim: args.dim,
            seed: args.data_seed,
            class_separation: args.separation,
            test_per_class: args.test_per_class,
        })?,
    };

    let mut layer_sizes = vec![train_data.feature_dim];
    layer_sizes.extend(parse_hidden(&args.hidden)?);
    layer_sizes.push(train_data.num_classes);
    let mlp_cfg = MlpConfig {
        layer_sizes,
        activation: parse::parse_activation(&args.activation)?,
        sigma_sharing: match args.sigma_sharing {
            SharingArg::PerLayer => SigmaSharing::PerLayer,
            SharingArg::Global => SigmaSharing::Global,
        },
        init: match args.init {
            InitArg::FanIn => InitScheme::FanInScaled,
            InitArg::NegativeBias => InitScheme::ConstantNegativeBias,
        },
        seed: args.model_seed,
    };
    let tc = train_config_from(&args);
    let (_mlp, report) = trainer::train(&mlp_cfg, &train_data, &test_data, &tc)?;
    emit_json(&report, args.out.as_deref())?;
    Ok(true)
}

fn run_suite(args: SuiteArgs) -> Result<bool> {
    let ratios: Vec<f64> = args
        .ratios
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().context("bad ratio"))
        .collect::<Result<_>>()?;
    let activations = parse::parse_zoo(&args.activations)?;
    let cfg = SuiteConfig {
        data: LongTailConfig {
            num_classes: args.classes,
            max_count: args.nmax,
            imbalance_ratio: 1.0,
            feature_dim: args.dim,
            seed: args.data_seed,
            class_separation: args.separation,
            test_per_class: args.test_per_class,
        },
        hidden_sizes: parse_hidden(&args.hidden)?,
        train: TrainConfig {
            epochs: args.epochs,
            batch_size: args.batch_size,
            learning_rate: args.lr,
            weight_decay: args.weight_decay,
            optimizer: Optimizer::AdamW,
            lr_schedule: LrSchedule::Cosine,
            loss: LossKind::WeightedCrossEntropy,
            seed: args.seed,
        },
        init: InitScheme::FanInScaled,
        sigma_sharing: SigmaSharing::PerLayer,
        model_seed: args.model_seed,
    };
    let table = trainer::run_imbalance_suite(&ratios, &activations, &cfg)?;

    let mut csv = String::from("schema,iglu.suite.v1\n");
    let _ = write!(csv, "activation");
    for r in &table.ratios {
        let _ = write!(csv, ",loss[rho={r}],acc[rho={r}]");
    }
    let _ = writeln!(csv);
    for row in &table.rows {
        let _ = write!(csv, "{}", row.activation);
        for cell in &row.cells {
            let _ = write!(csv, ",{},{}", cell.test_loss, cell.balanced_accuracy);
        }
        let _ = writeln!(csv);
    }
    emit(&csv, args.out.as_deref())?;
    Ok(true)
}

fn run_bench_cmd(mut args: BenchArgs) -> Result<bool> {
    if args.smoke {
        args.dim = 1_000;
        args.iters = 100;
        args.warmup = 10;
    }
    let zoo = parse::parse_zoo(&args.zoo)?;
    let proto = BenchProtocol {
        input_dim: args.dim,
        iterations: args.iters,
        warmup_iterations: args.warmup,
        seed: args.seed,
        precision: match args.precision {
            PrecisionArg::Single => Precision::Single,
            PrecisionArg::Double => Precision::Double,
        },
    };
    let report = bench::run_bench(&zoo, &proto)?;
    print!("{}", bench::to_markdown(&report));
    if let Some(path) = &args.json {
        let path = resolve_out(path);
        fs::write(&path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(true)
}
