//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use gpn_core::baselines::{greedy_two_stage, random_permutation, random_qap, random_tsp, two_opt_swap};
use gpn_core::dfp::DfpView;
use gpn_core::instance::{
    generate_qap, generate_tsp_matrix, parse_qaplib, parse_tsplib, serialize_qaplib,
    serialize_tsplib, tsp_to_qap, GeneratorConfig, QapInstance, TspInstance,
};
use gpn_core::solver::{
    evaluate_qap_cost, evaluate_tour, solve_matrix_tsp, solve_qap, DecodeMode, MatrixTspGpn,
    TwoStageGpn,
};
use gpn_core::training::{
    load_checkpoint, save_checkpoint, train_bank, train_matrix_tsp, train_two_stage, write_curve_csv,
    BaselineMode, ModelKind, TrainConfig, TrainedModel,
};

use crate::report::{
    lookup_best_known, read_best_known, render_table, write_csv, BenchRow, CSV_HEADER,
};

pub enum CliError {
    Usage(String),
    Core(gpn_core::Error),
}

impl From<gpn_core::Error> for CliError {
    fn from(err: gpn_core::Error) -> Self {
        CliError::Core(err)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "gpn",
    version,
    about = "Graph pointer networks for matrix TSP and QAP: generate, train, solve, benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance in TSPLIB or QAPLIB format.
    Gen(GenArgs),
    /// Train a model and write its checkpoint and training curve.
    Train(TrainArgs),
    /// Solve one instance with a trained checkpoint.
    Solve(SolveArgs),
    /// Benchmark a directory of instances with several methods.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Task {
    Tsp,
    Qap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Greedy,
    Sample,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineArg {
    Ema,
    SelfCritic,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    task: Task,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability of zeroing an off-diagonal entry.
    #[arg(long, default_value_t = 0.0)]
    zero_prob: f64,
    #[arg(long, default_value_t = 0.0)]
    low: f64,
    #[arg(long, default_value_t = 1.0)]
    high: f64,
    /// Draw the distance matrix without mirroring.
    #[arg(long)]
    asymmetric: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    task: Task,
    /// Instance size (defaults to 50 for TSP, 49 for QAP).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lr_decay: Option<f64>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Train the with-LSTM ablation arm (TSP only).
    #[arg(long)]
    lstm: bool,
    #[arg(long, value_enum, default_value = "ema")]
    baseline: BaselineArg,
    #[arg(long)]
    ema_beta: Option<f64>,
    /// Sparsity of the generated training instances.
    #[arg(long)]
    zero_prob: Option<f64>,
    /// Train a dense + sparse model bank (QAP only).
    #[arg(long)]
    bank: bool,
    #[arg(long)]
    sparse_zero_prob: Option<f64>,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Training-curve CSV path (defaults to the checkpoint with .csv).
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Print the resolved configuration and exit without training.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    mode: Mode,
    /// For sampling: decode this many solutions and keep the best.
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    best_known: Option<f64>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Sparse-specialized checkpoint; used when the instance's DFP zero
    /// ratio reaches the routing threshold.
    #[arg(long)]
    sparse_checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    sparse_threshold: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .tsp (TSP) or .dat (QAP) instance files.
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, value_enum)]
    task: Task,
    /// Comma-separated subset of gpn,gpn+lstm,greedy,random,two_opt.
    #[arg(long, default_value = "gpn,greedy,random,two_opt")]
    methods: String,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    lstm_checkpoint: Option<PathBuf>,
    /// Two-column name,cost CSV of best-known costs.
    #[arg(long)]
    best_known: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "greedy")]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sparse_checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    sparse_threshold: f64,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Train(args) => cmd_train(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let mut cfg = GeneratorConfig::new(args.n, args.seed)
        .with_zero_prob(args.zero_prob)
        .with_range(args.low, args.high);
    if args.asymmetric {
        cfg = cfg.asymmetric();
    }
    let text = match args.task {
        Task::Tsp => serialize_tsplib(&generate_tsp_matrix(&cfg)?),
        Task::Qap => serialize_qaplib(&generate_qap(&cfg)?),
    };
    std::fs::write(&args.out, text).map_err(gpn_core::Error::from)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn resolve_train_config(args: &TrainArgs) -> CliResult<TrainConfig> {
    let kind = match args.task {
        Task::Tsp => ModelKind::MatrixTsp,
        Task::Qap => ModelKind::TwoStageQap,
    };
    let mut cfg = TrainConfig::default_for(kind);
    cfg.seed = args.seed;
    cfg.lstm = args.lstm;
    cfg.baseline = match args.baseline {
        BaselineArg::Ema => BaselineMode::Ema,
        BaselineArg::SelfCritic => BaselineMode::SelfCritic,
    };
    if let Some(n) = args.n {
        cfg.train_n = n;
    }
    if let Some(epochs) = args.epochs {
        cfg.epochs = epochs;
    }
    if let Some(batch) = args.batch {
        cfg.batch_size = batch;
    }
    if let Some(steps) = args.steps {
        cfg.steps_per_epoch = steps;
    }
    if let Some(lr) = args.lr {
        cfg.lr = lr;
    }
    if let Some(decay) = args.lr_decay {
        cfg.lr_decay = decay;
    }
    if let Some(hidden) = args.hidden_dim {
        cfg.hidden_dim = hidden;
    }
    if let Some(layers) = args.layers {
        cfg.layers = layers;
    }
    if let Some(beta) = args.ema_beta {
        cfg.ema_beta = beta;
    }
    if let Some(p) = args.zero_prob {
        cfg.zero_prob = p;
    }
    if let Some(p) = args.sparse_zero_prob {
        cfg.sparse_zero_prob = p;
    }
    if args.lstm && args.task == Task::Qap {
        return Err(usage("--lstm applies to --task tsp only"));
    }
    if args.bank && args.task == Task::Tsp {
        return Err(usage("--bank applies to --task qap only"));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("ckpt");
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

fn print_config(task: Task, cfg: &TrainConfig, bank: bool) {
    let task = match task {
        Task::Tsp => "tsp",
        Task::Qap => "qap",
    };
    println!("task={task} n={} seed={}", cfg.train_n, cfg.seed);
    println!(
        "epochs={} batch={} steps={} lr={} lr_decay={}",
        cfg.epochs, cfg.batch_size, cfg.steps_per_epoch, cfg.lr, cfg.lr_decay
    );
    println!(
        "hidden_dim={} layers={} lstm={} baseline={:?} ema_beta={}",
        cfg.hidden_dim, cfg.layers, cfg.lstm, cfg.baseline, cfg.ema_beta
    );
    println!(
        "zero_prob={} sparse_zero_prob={} bank={bank}",
        cfg.zero_prob, cfg.sparse_zero_prob
    );
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let cfg = resolve_train_config(&args)?;
    if args.print_config {
        print_config(args.task, &cfg, args.bank);
        return Ok(());
    }
    let curve_path = args
        .curve
        .clone()
        .unwrap_or_else(|| args.checkpoint.with_extension("csv"));

    if args.bank {
        let (bank, dense_curve, sparse_curve) = train_bank(&cfg)?;
        let dense_path = with_suffix(&args.checkpoint, "dense");
        let sparse_path = with_suffix(&args.checkpoint, "sparse");
        save_checkpoint(&TrainedModel::TwoStageQap(bank.dense_model), &dense_path)?;
        save_checkpoint(&TrainedModel::TwoStageQap(bank.sparse_model), &sparse_path)?;
        write_curve_csv(&curve_path, &dense_curve)?;
        write_curve_csv(with_suffix(&curve_path, "sparse"), &sparse_curve)?;
        println!("wrote {} and {}", dense_path.display(), sparse_path.display());
        return Ok(());
    }

    match args.task {
        Task::Tsp => {
            let (model, curve) = train_matrix_tsp(&cfg)?;
            save_checkpoint(&TrainedModel::MatrixTsp(model), &args.checkpoint)?;
            write_curve_csv(&curve_path, &curve)?;
        }
        Task::Qap => {
            let (model, curve) = train_two_stage(&cfg)?;
            save_checkpoint(&TrainedModel::TwoStageQap(model), &args.checkpoint)?;
            write_curve_csv(&curve_path, &curve)?;
        }
    }
    println!(
        "wrote {} and {}",
        args.checkpoint.display(),
        curve_path.display()
    );
    Ok(())
}

enum Instance {
    Tsp(TspInstance),
    Qap(QapInstance),
}

impl Instance {
    fn name(&self) -> &str {
        match self {
            Instance::Tsp(t) => &t.name,
            Instance::Qap(q) => &q.name,
        }
    }

    fn n(&self) -> usize {
        match self {
            Instance::Tsp(t) => t.n,
            Instance::Qap(q) => q.n,
        }
    }

    fn zero_ratio(&self) -> Option<f64> {
        match self {
            Instance::Tsp(_) => None,
            Instance::Qap(q) => Some(DfpView::new(q).zero_ratio()),
        }
    }
}

/// Prefixes data errors with the offending file; the parser messages
/// already carry the offending token or line.
fn with_path(path: &Path, err: gpn_core::Error) -> CliError {
    use gpn_core::Error::*;
    let tag = |m: String| format!("{}: {m}", path.display());
    CliError::Core(match err {
        MalformedHeader(m) => MalformedHeader(tag(m)),
        MalformedNumber(m) => MalformedNumber(tag(m)),
        DimensionMismatch(m) => DimensionMismatch(tag(m)),
        UnknownFormat(m) => UnknownFormat(tag(m)),
        CorruptCheckpoint(m) => CorruptCheckpoint(tag(m)),
        other => other,
    })
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string();
    let text = std::fs::read_to_string(path).map_err(gpn_core::Error::from)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsp") => {
            let mut t = parse_tsplib(&text).map_err(|e| with_path(path, e))?;
            if t.name.is_empty() {
                t.name = stem;
            }
            Ok(Instance::Tsp(t))
        }
        Some("dat") | Some("qap") => Ok(Instance::Qap(
            parse_qaplib(&text)
                .map_err(|e| with_path(path, e))?
                .with_name(stem),
        )),
        other => Err(usage(format!(
            "cannot infer instance format from extension {other:?} of {} (expected .tsp, .dat, or .qap)",
            path.display()
        ))),
    }
}

struct QapSolver {
    dense: TwoStageGpn,
    sparse: Option<TwoStageGpn>,
    threshold: f64,
}

impl QapSolver {
    fn model_for(&self, q: &QapInstance) -> &TwoStageGpn {
        match &self.sparse {
            Some(sparse) if DfpView::new(q).zero_ratio() >= self.threshold => sparse,
            _ => &self.dense,
        }
    }
}

fn load_model(path: &Path) -> CliResult<TrainedModel> {
    load_checkpoint(path).map_err(|e| with_path(path, e))
}

fn load_tsp_model(path: &Path) -> CliResult<MatrixTspGpn> {
    match load_model(path)? {
        TrainedModel::MatrixTsp(m) => Ok(m),
        TrainedModel::TwoStageQap(_) => Err(usage(format!(
            "{} holds a QAP model; a matrix-TSP checkpoint is required here",
            path.display()
        ))),
    }
}

fn load_qap_model(path: &Path) -> CliResult<TwoStageGpn> {
    match load_model(path)? {
        TrainedModel::TwoStageQap(m) => Ok(m),
        TrainedModel::MatrixTsp(_) => Err(usage(format!(
            "{} holds a matrix-TSP model; a two-stage QAP checkpoint is required here",
            path.display()
        ))),
    }
}

/// Best-of-`samples` decode; greedy mode ignores `samples`. Returns the
/// permutation, the independently re-evaluated cost, and decode-only time.
fn decode_best(
    instance: &Instance,
    tsp_model: Option<&MatrixTspGpn>,
    qap_solver: Option<&QapSolver>,
    mode: Mode,
    samples: usize,
    seed: u64,
) -> CliResult<(Vec<usize>, f64, f64)> {
    let rounds = match mode {
        Mode::Greedy => 1,
        Mode::Sample => samples.max(1),
    };
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut total_time = 0.0;
    for round in 0..rounds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(round as u64));
        let decode_mode = match mode {
            Mode::Greedy => DecodeMode::Greedy,
            Mode::Sample => DecodeMode::Sample,
        };
        let solution = match instance {
            Instance::Tsp(t) => match (tsp_model, qap_solver) {
                (Some(model), _) => solve_matrix_tsp(model, t, decode_mode, &mut rng)?,
                (None, Some(solver)) => {
                    let reduced = tsp_to_qap(t);
                    solve_qap(solver.model_for(&reduced), &reduced, decode_mode, &mut rng)?
                }
                (None, None) => return Err(usage("no model available for a TSP instance")),
            },
            Instance::Qap(q) => match qap_solver {
                Some(solver) => solve_qap(solver.model_for(q), q, decode_mode, &mut rng)?,
                None => return Err(usage("no QAP model available for a QAP instance")),
            },
        };
        total_time += solution.elapsed.as_secs_f64();
        let cost = reevaluate(instance, &solution.perm)?;
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((solution.perm, cost));
        }
    }
    let (perm, cost) = best.expect("at least one decode round");
    Ok((perm, cost, total_time))
}

/// Costs are always re-derived from the permutation before reporting.
fn reevaluate(instance: &Instance, perm: &[usize]) -> CliResult<f64> {
    Ok(match instance {
        Instance::Tsp(t) => evaluate_tour(t, perm)?,
        Instance::Qap(q) => evaluate_qap_cost(q, perm)?,
    })
}

fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let instance = load_instance(&args.instance)?;

    let loaded = load_model(&args.checkpoint)?;
    let (tsp_model, mut qap_solver) = match loaded {
        TrainedModel::MatrixTsp(m) => (Some(m), None),
        TrainedModel::TwoStageQap(m) => (
            None,
            Some(QapSolver {
                dense: m,
                sparse: None,
                threshold: args.sparse_threshold,
            }),
        ),
    };
    if let Some(path) = &args.sparse_checkpoint {
        let sparse = load_qap_model(path)?;
        match &mut qap_solver {
            Some(solver) => solver.sparse = Some(sparse),
            None => return Err(usage("--sparse-checkpoint requires a QAP checkpoint")),
        }
    }
    if matches!(instance, Instance::Tsp(_)) && tsp_model.is_none() && qap_solver.is_none() {
        return Err(usage("no usable model for this instance"));
    }
    if matches!(instance, Instance::Qap(_)) && qap_solver.is_none() {
        return Err(usage(format!(
            "{} is a QAP instance but the checkpoint holds a TSP model",
            args.instance.display()
        )));
    }

    let (perm, cost, time_s) = decode_best(
        &instance,
        tsp_model.as_ref(),
        qap_solver.as_ref(),
        args.mode,
        args.samples,
        args.seed,
    )?;

    let row = BenchRow::new(
        instance.name(),
        instance.n(),
        "gpn",
        cost,
        args.best_known,
        time_s,
        instance.zero_ratio(),
    )?;
    print!("{}", render_table(std::slice::from_ref(&row)));
    let one_based: Vec<usize> = perm.iter().map(|p| p + 1).collect();
    println!("permutation: {one_based:?}");
    if let Some(path) = &args.out_csv {
        write_csv(path, std::slice::from_ref(&row))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Method {
    Gpn,
    GpnLstm,
    Greedy,
    Random,
    TwoOpt,
}

impl Method {
    fn parse_list(list: &str) -> CliResult<Vec<Method>> {
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            out.push(match name {
                "gpn" => Method::Gpn,
                "gpn+lstm" => Method::GpnLstm,
                "greedy" => Method::Greedy,
                "random" => Method::Random,
                "two_opt" => Method::TwoOpt,
                other => {
                    return Err(usage(format!(
                        "unknown method '{other}' (expected gpn, gpn+lstm, greedy, random, two_opt)"
                    )))
                }
            });
        }
        if out.is_empty() {
            return Err(usage("--methods must name at least one method"));
        }
        Ok(out)
    }

    fn label(self) -> &'static str {
        match self {
            Method::Gpn => "gpn",
            Method::GpnLstm => "gpn+lstm",
            Method::Greedy => "greedy",
            Method::Random => "random",
            Method::TwoOpt => "two_opt",
        }
    }
}

fn bench_one(
    instance: &Instance,
    method: Method,
    args: &BenchArgs,
    tsp_model: Option<&MatrixTspGpn>,
    lstm_model: Option<&MatrixTspGpn>,
    qap_solver: Option<&QapSolver>,
    best_known: Option<f64>,
) -> CliResult<BenchRow> {
    let (perm, time_s) = match (method, instance) {
        (Method::Gpn, _) => {
            let (perm, _, time_s) = decode_best(
                instance,
                tsp_model,
                qap_solver,
                args.mode,
                args.samples,
                args.seed,
            )?;
            (perm, time_s)
        }
        (Method::GpnLstm, Instance::Tsp(_)) => {
            let model =
                lstm_model.ok_or_else(|| usage("method gpn+lstm needs --lstm-checkpoint"))?;
            let (perm, _, time_s) =
                decode_best(instance, Some(model), None, args.mode, args.samples, args.seed)?;
            (perm, time_s)
        }
        (Method::GpnLstm, Instance::Qap(_)) => {
            return Err(usage("method gpn+lstm applies to TSP benches only"))
        }
        (Method::Greedy, Instance::Qap(q)) => {
            let r = greedy_two_stage(q)?;
            (r.perm, r.elapsed.as_secs_f64())
        }
        (Method::Greedy, Instance::Tsp(t)) => {
            let r = greedy_two_stage(&tsp_to_qap(t))?;
            (r.perm, r.elapsed.as_secs_f64())
        }
        (Method::Random, Instance::Qap(q)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let r = random_qap(q, &mut rng)?;
            (r.perm, r.elapsed.as_secs_f64())
        }
        (Method::Random, Instance::Tsp(t)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let r = random_tsp(t, &mut rng)?;
            (r.perm, r.elapsed.as_secs_f64())
        }
        (Method::TwoOpt, Instance::Qap(q)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let start = random_permutation(q.n, &mut rng);
            let r = two_opt_swap(q, &start, 10_000)?;
            (r.perm, r.elapsed.as_secs_f64())
        }
        (Method::TwoOpt, Instance::Tsp(t)) => {
            let reduced = tsp_to_qap(t);
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let start = random_permutation(reduced.n, &mut rng);
            let r = two_opt_swap(&reduced, &start, 10_000)?;
            (r.perm, r.elapsed.as_secs_f64())
        }
    };
    let cost = reevaluate(instance, &perm)?;
    Ok(BenchRow::new(
        instance.name(),
        instance.n(),
        method.label(),
        cost,
        best_known,
        time_s,
        instance.zero_ratio(),
    )?)
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let methods = Method::parse_list(&args.methods)?;
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }

    let want_ext = match args.task {
        Task::Tsp => "tsp",
        Task::Qap => "dat",
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .map_err(gpn_core::Error::from)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(want_ext))
        .collect();
    paths.sort();

    let needs_gpn = methods.contains(&Method::Gpn);
    let needs_lstm = methods.contains(&Method::GpnLstm);
    let (mut tsp_model, mut qap_solver) = (None, None);
    if needs_gpn {
        let path = args
            .checkpoint
            .as_ref()
            .ok_or_else(|| usage("method gpn needs --checkpoint"))?;
        match args.task {
            Task::Tsp => tsp_model = Some(load_tsp_model(path)?),
            Task::Qap => {
                let dense = load_qap_model(path)?;
                let sparse = match &args.sparse_checkpoint {
                    Some(p) => Some(load_qap_model(p)?),
                    None => None,
                };
                qap_solver = Some(QapSolver {
                    dense,
                    sparse,
                    threshold: args.sparse_threshold,
                });
            }
        }
    }
    let lstm_model = if needs_lstm {
        if args.task == Task::Qap {
            return Err(usage("method gpn+lstm applies to TSP benches only"));
        }
        let path = args
            .lstm_checkpoint
            .as_ref()
            .ok_or_else(|| usage("method gpn+lstm needs --lstm-checkpoint"))?;
        Some(load_tsp_model(path)?)
    } else {
        None
    };

    let best_known_table = match &args.best_known {
        Some(path) => read_best_known(path)?,
        None => Vec::new(),
    };

    let instances: Vec<Instance> = paths
        .iter()
        .map(|p| load_instance(p))
        .collect::<CliResult<_>>()?;

    let mut jobs: Vec<(usize, Method)> = Vec::new();
    for idx in 0..instances.len() {
        for &method in &methods {
            jobs.push((idx, method));
        }
    }
    let rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(idx, method)| {
            let instance = &instances[idx];
            let best = lookup_best_known(&best_known_table, instance.name());
            bench_one(
                instance,
                method,
                &args,
                tsp_model.as_ref(),
                lstm_model.as_ref(),
                qap_solver.as_ref(),
                best,
            )
            .map_err(|e| match e {
                CliError::Usage(m) => CliError::Usage(m),
                CliError::Core(c) => CliError::Core(c),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut rows = rows;
    rows.sort_by(|a, b| (a.instance.as_str(), a.method.as_str()).cmp(&(b.instance.as_str(), b.method.as_str())));

    if rows.is_empty() {
        println!("{CSV_HEADER}");
    } else {
        print!("{}", render_table(&rows));
    }
    if let Some(path) = &args.out_csv {
        write_csv(path, &rows)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
