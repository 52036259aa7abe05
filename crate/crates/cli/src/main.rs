use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;
use vistutor_core::explanations::{attach_explanations, FeatureMapFile};
use vistutor_core::hypothesis::{build_hypothesis_space, teachability_filter, HypothesisGenConfig};
use vistutor_core::model::{
    load_dataset, load_hypotheses, parse_positive_or_inf, split_dataset, write_dataset,
    write_hypotheses, write_json, write_teaching_set,
};
use vistutor_core::simulator::{run_experiment, ExperimentConfig};
use vistutor_core::teacher::{greedy_select, TeachingProblem};
use vistutor_core::{Dataset, Exec, HypothesisSpace, LearnerParams, Split, Strategy};
use vistutor_service::{ServiceConfig, ServiceError, SessionManager, SystemClock};

#[derive(Debug, Parser)]
#[command(
    name = "vistutor",
    version,
    about = "Select and evaluate teaching sets with explanation feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the hypothesis space on the training split.
    GenHyp(GenHypArgs),
    /// Compose explanation maps and write centered difficulties.
    Difficulty(DifficultyArgs),
    /// Select a teaching set for one strategy.
    Select(SelectArgs),
    /// Evaluate strategies with simulated learners.
    Simulate(SimulateArgs),
    /// Run the teaching session HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Seed of the stratified train/test split (defaults to --seed).
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 0.5, value_parser = parse_positive)]
    alpha: f64,
    /// Explanation scale, or "inf" to ignore explanations.
    #[arg(long, default_value = "1", value_parser = parse_positive_or_inf)]
    beta: f64,
    /// Density scale, or "inf" to ignore representativeness.
    #[arg(long, default_value = "1", value_parser = parse_positive_or_inf)]
    gamma: f64,
}

#[derive(Debug, Args)]
struct GenHypArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    num: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Debug, Args)]
struct DifficultyArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Feature maps and class weights; without it, the explanation maps
    /// already in the dataset are rescored.
    #[arg(long)]
    feature_maps: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    hypotheses: PathBuf,
    #[arg(long)]
    strategy: Strategy,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 20)]
    budget: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    split: SplitArgs,
    /// Score candidates on all cores.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    hypotheses: PathBuf,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "RAND_IM,RAND_EXP,STRICT,EXPLAIN"
    )]
    strategies: Vec<Strategy>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 20)]
    budget: usize,
    #[arg(long, default_value_t = 1000)]
    learners: usize,
    /// Test items per learner (defaults to the whole test split).
    #[arg(long)]
    test_len: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    split: SplitArgs,
    /// Simulate learners on all cores.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured port.
    #[arg(long)]
    port: Option<u16>,
}

fn parse_positive(token: &str) -> Result<f64, String> {
    match token.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive number")),
        Err(_) => Err(format!("'{token}' is not a number")),
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<vistutor_core::Error> for Failure {
    fn from(e: vistutor_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Config(_) | ServiceError::Log { .. } | ServiceError::Core(_) => {
                Failure::Data(e.to_string())
            }
            other => Failure::Internal(other.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn exec(parallel: bool) -> Exec {
    if parallel {
        Exec::default()
    } else {
        Exec::Sequential
    }
}

fn learner_params(p: &ParamArgs) -> Result<LearnerParams, Failure> {
    LearnerParams::new(p.alpha, p.beta, p.gamma).map_err(|e| Failure::Usage(e.to_string()))
}

fn params_json(p: &LearnerParams) -> serde_json::Value {
    serde_json::to_value(p).unwrap_or_default()
}

fn split(ds: &Dataset, args: &SplitArgs, seed: u64) -> Result<(Split, u64), Failure> {
    let split_seed = args.split_seed.unwrap_or(seed);
    Ok((
        split_dataset(ds, args.train_fraction, split_seed)?,
        split_seed,
    ))
}

/// Dataset, hypotheses, split and the teachable part of the training split.
fn prepare(
    dataset: &PathBuf,
    hypotheses: &PathBuf,
    args: &SplitArgs,
    seed: u64,
) -> Result<(Dataset, HypothesisSpace, Split, Vec<String>, u64), Failure> {
    let ds = load_dataset(dataset)?;
    let hs = load_hypotheses(hypotheses)?;
    hs.check_compatible(&ds)?;
    let (split, split_seed) = split(&ds, args, seed)?;
    let pool = teachability_filter(&ds, &split.train, &hs)?;
    info!(
        "{} items, {} train, {} teachable, {} test, {} hypotheses",
        ds.len(),
        split.train.len(),
        pool.len(),
        split.test.len(),
        hs.len()
    );
    Ok((ds, hs, split, pool, split_seed))
}

fn cmd_gen_hyp(a: &GenHypArgs) -> CliResult {
    let ds = load_dataset(&a.dataset)?;
    let (split, split_seed) = split(&ds, &a.split, a.seed)?;
    let cfg = HypothesisGenConfig {
        target_count: a.num,
        ..HypothesisGenConfig::with_seed(a.seed)
    };
    info!(
        "effective config: {}",
        json!({
            "command": "gen-hyp",
            "dataset": a.dataset,
            "out": a.out,
            "num": cfg.target_count,
            "seed": cfg.seed,
            "split_seed": split_seed,
            "train_fraction": a.split.train_fraction,
            "svm_lambda": cfg.svm_lambda,
            "svm_epochs": cfg.svm_epochs,
            "kmeans_max_iters": cfg.kmeans_max_iters,
        })
    );
    let hs = build_hypothesis_space(&ds, &split.train, &cfg)?;
    write_hypotheses(&hs, &a.out)?;
    info!("wrote {} hypotheses to {}", hs.len(), a.out.display());
    Ok(())
}

fn cmd_difficulty(a: &DifficultyArgs) -> CliResult {
    info!(
        "effective config: {}",
        json!({
            "command": "difficulty",
            "dataset": a.dataset,
            "feature_maps": a.feature_maps,
            "out": a.out,
        })
    );
    let ds = load_dataset(&a.dataset)?;
    let fm = a
        .feature_maps
        .as_ref()
        .map(FeatureMapFile::load)
        .transpose()?;
    let out = attach_explanations(&ds, fm.as_ref())?;
    write_dataset(&out, &a.out)?;
    info!("wrote {} items to {}", out.len(), a.out.display());
    Ok(())
}

fn cmd_select(a: &SelectArgs) -> CliResult {
    let params = learner_params(&a.params)?;
    let (ds, hs, _, pool, split_seed) = prepare(&a.dataset, &a.hypotheses, &a.split, a.seed)?;
    info!(
        "effective config: {}",
        json!({
            "command": "select",
            "dataset": a.dataset,
            "hypotheses": a.hypotheses,
            "strategy": a.strategy,
            "params": params_json(&params),
            "budget": a.budget,
            "seed": a.seed,
            "split_seed": split_seed,
            "train_fraction": a.split.train_fraction,
            "parallel": a.parallel,
            "out": a.out,
        })
    );
    let problem = TeachingProblem::new(&ds, &hs, &pool)?;
    let ts = greedy_select(
        a.strategy,
        a.budget,
        &problem,
        &params,
        a.seed,
        exec(a.parallel),
    )?;
    write_teaching_set(&ts, &a.out)?;
    if let Some(last) = ts.per_step.last() {
        info!(
            "R = {:.6} after {} items",
            last.objective,
            ts.item_ids.len()
        );
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult {
    let params = learner_params(&a.params)?;
    let (ds, hs, split, pool, split_seed) = prepare(&a.dataset, &a.hypotheses, &a.split, a.seed)?;
    let cfg = ExperimentConfig {
        budget: a.budget,
        params,
        learners_per_strategy: a.learners,
        test_len: a.test_len,
        seed: a.seed,
    };
    info!(
        "effective config: {}",
        json!({
            "command": "simulate",
            "dataset": a.dataset,
            "hypotheses": a.hypotheses,
            "strategies": a.strategies,
            "params": params_json(&params),
            "budget": a.budget,
            "learners": a.learners,
            "test_len": a.test_len.unwrap_or(split.test.len()).min(split.test.len()),
            "seed": a.seed,
            "split_seed": split_seed,
            "train_fraction": a.split.train_fraction,
            "parallel": a.parallel,
            "out": a.out,
        })
    );
    let problem = TeachingProblem::new(&ds, &hs, &pool)?;
    let report = run_experiment(&a.strategies, &problem, &split.test, &cfg, exec(a.parallel))?;
    for r in &report.reports {
        match (r.mean_accuracy, r.standard_error()) {
            (Some(m), Some(se)) => info!("{}: accuracy {m:.4} (se {se:.4})", r.strategy),
            _ => info!("{}: no learners", r.strategy),
        }
    }
    write_json(&report, &a.out)?;
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> CliResult {
    let mut cfg = ServiceConfig::load(&a.config)?;
    if let Some(port) = a.port {
        cfg.port = port;
    }
    info!(
        "effective config: {}",
        serde_json::to_string(&cfg).unwrap_or_default()
    );
    let ip: IpAddr = cfg
        .host
        .parse()
        .map_err(|_| Failure::Data(format!("invalid host '{}'", cfg.host)))?;
    let addr = SocketAddr::new(ip, cfg.port);
    let manager = Arc::new(SessionManager::open(cfg, Arc::new(SystemClock))?);
    info!("{} sessions restored", manager.session_ids().len());
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Internal(e.to_string()))?;
    info!("listening on http://{addr}");
    runtime
        .block_on(vistutor_service::serve(manager, addr))
        .map_err(|e| Failure::Internal(format!("server: {e}")))
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::GenHyp(a) => cmd_gen_hyp(a),
        Command::Difficulty(a) => cmd_difficulty(a),
        Command::Select(a) => cmd_select(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!("{}", f.message());
            ExitCode::from(f.code())
        }
    }
}
