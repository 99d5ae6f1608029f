//! `symbio`: run experiments, sweep ARIMA orders, compare models, plot.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on flag errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

use symbio::arima::{self, ArimaSpec};
use symbio::harness::{self, ExperimentConfig, ModelKind};
use symbio::marketdata::{load_csv, SupervisedDataset};
use symbio::plot::{self, Channel};
use symbio::Execution;

#[derive(Debug, Parser)]
#[command(name = "symbio", version, about = "Metaheuristic-trained FFNN and ARIMA forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one model for several replications and score it on the test split.
    Run(RunArgs),
    /// Evaluate a grid of ARIMA orders.
    SweepArima(SweepArgs),
    /// Run several models under the same seeds and tabulate them side by side.
    Compare(CompareArgs),
    /// Draw actual vs predicted prices from a predictions file as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, clap::Args)]
#[command(args_override_self = true)]
struct RunArgs {
    /// sos, pso, ga or arima.
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    /// Daily CSV with Date, Open and Close columns.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Replications [default: 20, or 1 for arima].
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Iterations (generations for GA).
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Population (swarm size for PSO).
    #[arg(long, default_value_t = 30)]
    pop: usize,
    #[arg(long, default_value = "./results")]
    out: PathBuf,
    /// PSO inertia weight.
    #[arg(long)]
    inertia: Option<f64>,
    /// PSO velocity clamp.
    #[arg(long)]
    vmax: Option<f64>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    /// ARIMA order as p,d,q.
    #[arg(long, value_parser = parse_order)]
    arima_order: Option<ArimaSpec>,
    /// key=value lines named after these flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
#[command(args_override_self = true)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "./results")]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Orders as "p,d,q;p,d,q;..." [default: the 11-order grid].
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
}

#[derive(Debug, clap::Args)]
#[command(args_override_self = true)]
struct CompareArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_parser = parse_model_list, default_value = "sos,pso,ga,arima")]
    models: ModelList,
    /// Replications per network model; arima always runs once.
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 30)]
    pop: usize,
    #[arg(long, default_value = "./results")]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct PlotArgs {
    /// predictions_r<k>.csv written by `run`.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_parser = parse_channel, default_value = "close")]
    channel: Channel,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "Actual vs predicted")]
    title: String,
}

#[derive(Debug, Clone)]
struct Grid(Vec<ArimaSpec>);

#[derive(Debug, Clone)]
struct ModelList(Vec<ModelKind>);

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: symbio::Error| e.to_string())
}

fn parse_model_list(s: &str) -> Result<ModelList, String> {
    harness::parse_models(s).map(ModelList).map_err(|e| e.to_string())
}

fn parse_order(s: &str) -> Result<ArimaSpec, String> {
    s.parse().map_err(|e: symbio::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    arima::parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn parse_channel(s: &str) -> Result<Channel, String> {
    s.parse().map_err(|e: symbio::Error| e.to_string())
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

/// Turns `key = value` lines into `--key value` arguments. Blank lines and
/// `#` comments are ignored.
fn config_args(path: &Path) -> Vec<OsString> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| {
        usage_error(ErrorKind::Io, format!("cannot read config {}: {e}", path.display()))
    });
    let mut args = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            usage_error(
                ErrorKind::InvalidValue,
                format!("{}:{}: expected key=value", path.display(), n + 1),
            );
        };
        let key = key.trim().trim_start_matches("--");
        if key == "config" {
            usage_error(ErrorKind::InvalidValue, "config files cannot include other config files");
        }
        args.push(OsString::from(format!("--{key}")));
        args.push(OsString::from(value.trim()));
    }
    args
}

/// Parses argv, splicing config-file arguments in front of the explicit
/// flags so that explicit flags override them.
fn parse_cli() -> Cli {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let cli = Cli::parse_from(&argv);
    let config = match &cli.command {
        Command::Run(a) => a.config.clone(),
        Command::Compare(a) => a.config.clone(),
        _ => None,
    };
    let Some(path) = config else { return cli };
    let mut spliced = argv[..2].to_vec();
    spliced.extend(config_args(&path));
    spliced.extend_from_slice(&argv[2..]);
    Cli::parse_from(spliced)
}

fn required<T>(value: Option<T>, flag: &str) -> T {
    value.unwrap_or_else(|| {
        usage_error(
            ErrorKind::MissingRequiredArgument,
            format!("the following required argument was not provided: --{flag}"),
        )
    })
}

fn run(args: RunArgs, exec: Execution) -> anyhow::Result<()> {
    let model = required(args.model, "model");
    let data = required(args.data, "data");
    let mut cfg = ExperimentConfig::new(model, data)
        .with_iterations(args.iters)
        .with_population(args.pop);
    cfg.replications = args.reps.unwrap_or(model.default_replications());
    cfg.master_seed = args.seed;
    cfg.output_dir = args.out;
    if let Some(v) = args.inertia {
        cfg.pso.inertia = v;
    }
    if let Some(v) = args.vmax {
        cfg.pso.v_max = v;
    }
    if let Some(v) = args.crossover_rate {
        cfg.ga.crossover_rate = v;
    }
    if let Some(v) = args.mutation_rate {
        cfg.ga.mutation_rate = v;
    }
    if let Some(v) = args.arima_order {
        cfg.arima_order = v;
    }
    if let Err(e) = cfg.validate() {
        usage_error(ErrorKind::ValueValidation, e);
    }
    let exp = harness::run_experiment(&cfg, exec)?;
    harness::persist(&exp, &cfg.output_dir)
        .with_context(|| format!("writing results to {}", cfg.output_dir.display()))?;
    print!("{}", harness::render_aggregate(model, &exp.aggregate));
    Ok(())
}

fn sweep(args: SweepArgs, exec: Execution) -> anyhow::Result<()> {
    let grid = args.grid.map_or_else(|| arima::DEFAULT_GRID.to_vec(), |g| g.0);
    let base = ExperimentConfig::new(ModelKind::Arima, &args.data);
    let parsed = load_csv(&args.data)?;
    let dataset = SupervisedDataset::build(&parsed.series, base.train_fraction)?;
    let rows = harness::sweep_dataset(&dataset, base.train_fraction, &grid, &base.arima_fit, args.seed, exec)?;
    let csv = arima::sweep_csv(&rows);
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("arima_sweep.csv"), &csv)?;
    print!("{csv}");
    if let Some(b) = arima::best_by_rmse(&rows) {
        println!("# best {} rmse={}", rows[b].spec, rows[b].metrics.rmse);
    }
    Ok(())
}

fn compare(args: CompareArgs, exec: Execution) -> anyhow::Result<()> {
    let data = required(args.data, "data");
    let models = args.models.0;
    let mut base = ExperimentConfig::new(models[0], data)
        .with_iterations(args.iters)
        .with_population(args.pop);
    base.replications = args.reps;
    base.master_seed = args.seed;
    base.output_dir = args.out;
    for &m in &models {
        let mut c = base.clone();
        c.model = m;
        if let Err(e) = c.validate() {
            usage_error(ErrorKind::ValueValidation, e);
        }
    }
    let results = harness::run_comparison(&base, &models, exec)?;
    let entries: Vec<_> = results.iter().map(|(m, e)| (*m, e.aggregate)).collect();
    print!("{}", harness::render_comparison(&entries));
    Ok(())
}

fn plot(args: PlotArgs) -> anyhow::Result<()> {
    let rows = plot::read_predictions(&args.pred)?;
    let (actual, predicted) = plot::channel_series(&rows, args.channel);
    let svg = plot::render_svg(&actual, &predicted, &args.title);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&args.out, svg).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = parse_cli();
    let exec = Execution::default();
    let outcome = match cli.command {
        Command::Run(a) => run(a, exec),
        Command::SweepArima(a) => sweep(a, exec),
        Command::Compare(a) => compare(a, exec),
        Command::Plot(a) => plot(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
