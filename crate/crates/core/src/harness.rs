//! Seeded experiment replications, aggregation and result files.
//!
//! One replication: split the series 80/20, scale on the training part,
//! train the model on training pairs only, then forecast every test day one
//! step ahead and score the open and close channels. Replication `r` uses
//! seed `derive_seed(master_seed, r)` whatever the model, so models compared
//! under the same master seed see the same seed sequence.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::arima::{self, ArimaModel, ArimaSpec, FitConfig, SweepRow};
use crate::ffnn::{FfnnObjective, Network, Topology};
use crate::marketdata::{load_csv, SupervisedDataset};
use crate::metaheuristics::{derive_seed, ga_run, pso_run, sos_run, GaConfig, PsoConfig, RngStream, SosConfig};
use crate::metrics::{channel_average, MetricsReport};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sos,
    Pso,
    Ga,
    Arima,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Sos, ModelKind::Pso, ModelKind::Ga, ModelKind::Arima];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sos => "sos",
            ModelKind::Pso => "pso",
            ModelKind::Ga => "ga",
            ModelKind::Arima => "arima",
        }
    }

    /// ARIMA training is deterministic enough to report as a single run.
    pub fn default_replications(self) -> usize {
        match self {
            ModelKind::Arima => 1,
            _ => 20,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model {s:?}")))
    }
}

/// Parses a comma-separated model list such as `sos,pso,ga,arima`.
pub fn parse_models(s: &str) -> Result<Vec<ModelKind>> {
    let models: Vec<ModelKind> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if models.is_empty() {
        return Err(Error::InvalidConfig("empty model list".into()));
    }
    Ok(models)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub data: PathBuf,
    pub replications: usize,
    pub master_seed: u64,
    pub train_fraction: f64,
    pub topology: Topology,
    pub sos: SosConfig,
    pub pso: PsoConfig,
    pub ga: GaConfig,
    pub arima_order: ArimaSpec,
    pub arima_fit: FitConfig,
    /// Not echoed into `config.json`, so the same experiment written to two
    /// places produces identical files.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(model: ModelKind, data: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            model,
            data: data.into(),
            replications: model.default_replications(),
            master_seed: 42,
            train_fraction: 0.8,
            topology: Topology::default(),
            sos: SosConfig::default(),
            pso: PsoConfig::default(),
            ga: GaConfig::default(),
            arima_order: ArimaSpec::new(1, 0, 1),
            arima_fit: FitConfig::default(),
            output_dir: PathBuf::from("results"),
        }
    }

    /// Sets iterations (generations for GA) on all three engines.
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.sos.iterations = iterations;
        self.pso.iterations = iterations;
        self.ga.generations = iterations;
        self
    }

    /// Sets population (swarm size for PSO) on all three engines.
    pub fn with_population(mut self, population: usize) -> Self {
        self.sos.population = population;
        self.pso.swarm = population;
        self.ga.population = population;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidFraction(self.train_fraction));
        }
        match self.model {
            ModelKind::Sos => self.sos.validate(),
            ModelKind::Pso => self.pso.validate(),
            ModelKind::Ga => self.ga.validate(),
            ModelKind::Arima => Ok(()),
        }
    }

    pub fn replication_seeds(&self) -> Vec<u64> {
        (0..self.replications as u64).map(|r| derive_seed(self.master_seed, r)).collect()
    }
}

/// One test day, normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub date: NaiveDate,
    pub actual_open: f64,
    pub pred_open: f64,
    pub actual_close: f64,
    pub pred_close: f64,
}

/// What training produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Trained {
    Network {
        genes: Vec<f64>,
        train_fitness: f64,
        evaluation_count: u64,
    },
    Arima {
        open: ArimaModel,
        close: ArimaModel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub replication: usize,
    pub seed: u64,
    pub metrics: MetricsReport,
    pub predictions: Vec<PredictionRow>,
    pub trained: Trained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    /// Per-metric minimum; different metrics may come from different runs.
    pub best: MetricsReport,
    pub average: MetricsReport,
    /// Sample standard deviation; `None` for a single run.
    pub std: Option<MetricsReport>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub results: Vec<RunResult>,
    pub aggregate: RunAggregate,
}

fn score(predictions: &[PredictionRow]) -> Result<MetricsReport> {
    let col = |f: fn(&PredictionRow) -> f64| predictions.iter().map(f).collect::<Vec<_>>();
    let open = MetricsReport::compute(&col(|p| p.actual_open), &col(|p| p.pred_open))?;
    let close = MetricsReport::compute(&col(|p| p.actual_close), &col(|p| p.pred_close))?;
    Ok(channel_average(&open, &close))
}

/// Runs one replication on a prepared dataset.
pub fn run_replication(
    config: &ExperimentConfig,
    dataset: &SupervisedDataset,
    replication: usize,
    seed: u64,
    exec: Execution,
) -> Result<RunResult> {
    let (predicted, trained): (Vec<[f64; 2]>, Trained) = match config.model {
        ModelKind::Arima => {
            let channel = |rows: &[[f64; 2]], k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
            let mut fitted = Vec::with_capacity(2);
            let mut preds = Vec::with_capacity(2);
            for k in 0..2 {
                let train = channel(&dataset.train_rows, k);
                let test = channel(&dataset.test_rows, k);
                let mut rng = RngStream::new(derive_seed(seed, k as u64));
                let model = arima::fit(&train, config.arima_order, &config.arima_fit, &mut rng)?;
                preds.push(arima::rolling_forecast(&model, &train, &test)?);
                fitted.push(model);
            }
            let rows = preds[0].iter().zip(&preds[1]).map(|(o, c)| [*o, *c]).collect();
            let close = fitted.pop().expect("two channels");
            let open = fitted.pop().expect("two channels");
            (rows, Trained::Arima { open, close })
        }
        engine => {
            let objective = FfnnObjective::new(config.topology, dataset.train_pairs.clone())?;
            let mut rng = RngStream::new(seed);
            let trace = match engine {
                ModelKind::Sos => sos_run(&objective, &config.sos, &mut rng, exec)?,
                ModelKind::Pso => pso_run(&objective, &config.pso, &mut rng, exec)?,
                ModelKind::Ga => ga_run(&objective, &config.ga, &mut rng, exec)?,
                ModelKind::Arima => unreachable!(),
            };
            let net = Network::decode(&trace.best_genes, &config.topology)?;
            let rows = dataset
                .test_pairs
                .iter()
                .map(|p| {
                    let y = net.forward(&p.input);
                    [y[0], y[1]]
                })
                .collect();
            (
                rows,
                Trained::Network {
                    genes: trace.best_genes,
                    train_fitness: trace.best_fitness,
                    evaluation_count: trace.evaluation_count,
                },
            )
        }
    };

    let predictions: Vec<PredictionRow> = dataset
        .test_pairs
        .iter()
        .zip(&predicted)
        .zip(&dataset.test_dates)
        .map(|((pair, pred), date)| PredictionRow {
            date: *date,
            actual_open: pair.target[0],
            pred_open: pred[0],
            actual_close: pair.target[1],
            pred_close: pred[1],
        })
        .collect();
    Ok(RunResult {
        replication,
        seed,
        metrics: score(&predictions)?,
        predictions,
        trained,
    })
}

/// Loads the dataset and runs every replication.
pub fn run_experiment(config: &ExperimentConfig, exec: Execution) -> Result<Experiment> {
    config.validate()?;
    let parsed = load_csv(&config.data)?;
    let dataset = SupervisedDataset::build(&parsed.series, config.train_fraction)?;
    run_on_dataset(config, &dataset, exec)
}

/// Runs every replication on an already prepared dataset.
pub fn run_on_dataset(
    config: &ExperimentConfig,
    dataset: &SupervisedDataset,
    exec: Execution,
) -> Result<Experiment> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = config.replication_seeds().into_iter().enumerate().collect();
    let results = exec.try_map(&jobs, |&(r, seed)| run_replication(config, dataset, r, seed, exec))?;
    let aggregate = aggregate(&results)?;
    Ok(Experiment {
        config: config.clone(),
        results,
        aggregate,
    })
}

/// Per-metric minimum, mean and sample standard deviation over runs.
pub fn aggregate(results: &[RunResult]) -> Result<RunAggregate> {
    let reports: Vec<MetricsReport> = results.iter().map(|r| r.metrics).collect();
    aggregate_reports(&reports)
}

pub fn aggregate_reports(reports: &[MetricsReport]) -> Result<RunAggregate> {
    if reports.is_empty() {
        return Err(Error::Empty);
    }
    let n = reports.len();
    let mut best = [f64::INFINITY; 4];
    let mut mean = [0.0; 4];
    for r in reports {
        for (k, v) in r.values().into_iter().enumerate() {
            best[k] = best[k].min(v);
            mean[k] += v / n as f64;
        }
    }
    let std = (n > 1).then(|| {
        let mut ss = [0.0; 4];
        for r in reports {
            for (k, v) in r.values().into_iter().enumerate() {
                ss[k] += (v - mean[k]).powi(2);
            }
        }
        MetricsReport::from_values(ss.map(|s| (s / (n - 1) as f64).sqrt()), n)
    });
    Ok(RunAggregate {
        best: MetricsReport::from_values(best, n),
        average: MetricsReport::from_values(mean, n),
        std,
    })
}

/// Rounds to 9 significant digits and prints the shortest representation
/// of the rounded value.
pub fn sig9(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn predictions_csv(rows: &[PredictionRow]) -> String {
    let mut s = String::from("date,actual_open,pred_open,actual_close,pred_close\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.date,
            sig9(r.actual_open),
            sig9(r.pred_open),
            sig9(r.actual_close),
            sig9(r.pred_close)
        ));
    }
    s
}

fn metric_cells(m: Option<&MetricsReport>) -> String {
    match m {
        Some(m) => m.values().map(|v| v.to_string()).join(","),
        None => ["-"; 4].join(","),
    }
}

/// One row per replication, then `best`, `average` and `std` rows.
pub fn summary_csv(results: &[RunResult], agg: &RunAggregate) -> String {
    let mut s = String::from("run,seed,rmse,mape,mad,mse\n");
    for r in results {
        s.push_str(&format!("{},{},{}\n", r.replication + 1, r.seed, metric_cells(Some(&r.metrics))));
    }
    s.push_str(&format!("best,,{}\n", metric_cells(Some(&agg.best))));
    s.push_str(&format!("average,,{}\n", metric_cells(Some(&agg.average))));
    s.push_str(&format!("std,,{}\n", metric_cells(agg.std.as_ref())));
    s
}

#[derive(Serialize)]
struct ReplicationEcho<'a> {
    replication: usize,
    seed: u64,
    trained: &'a Trained,
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    config: &'a ExperimentConfig,
    replications: Vec<ReplicationEcho<'a>>,
}

pub fn config_json(experiment: &Experiment) -> Result<String> {
    let echo = ConfigEcho {
        config: &experiment.config,
        replications: experiment
            .results
            .iter()
            .map(|r| ReplicationEcho {
                replication: r.replication + 1,
                seed: r.seed,
                trained: &r.trained,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&echo)?;
    s.push('\n');
    Ok(s)
}

/// Writes `predictions_r<k>.csv` (k from 1), `summary.csv` and
/// `config.json` into `dir`, creating it if needed. Returns the paths
/// written.
pub fn persist(experiment: &Experiment, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    for r in &experiment.results {
        write(format!("predictions_r{}.csv", r.replication + 1), predictions_csv(&r.predictions))?;
    }
    write("summary.csv".into(), summary_csv(&experiment.results, &experiment.aggregate))?;
    write("config.json".into(), config_json(experiment)?)?;
    Ok(written)
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<w$}", w = widths[c]))
            .collect();
        s.push_str(line.join("  ").trim_end());
        s.push('\n');
    }
    s
}

/// Aligned aggregate table for one model. A single replication prints one
/// `single` row; otherwise `best`, `average` and `std`.
pub fn render_aggregate(model: ModelKind, agg: &RunAggregate) -> String {
    let mut rows = vec![["model", "stat", "rmse", "mape", "mad", "mse"].map(String::from).to_vec()];
    let mut push = |stat: &str, m: &MetricsReport| {
        let mut row = vec![model.to_string(), stat.to_string()];
        row.extend(m.values().map(|v| v.to_string()));
        rows.push(row);
    };
    match &agg.std {
        None => push("single", &agg.average),
        Some(std) => {
            push("best", &agg.best);
            push("average", &agg.average);
            push("std", std);
        }
    }
    align(&rows)
}

/// Models side by side: rows are RMSE/MAPE/MAD crossed with
/// Best/Average/Std.
pub fn comparison_rows(entries: &[(ModelKind, RunAggregate)]) -> Vec<Vec<String>> {
    let mut rows = vec![{
        let mut h = vec!["metric".to_string(), "statistic".to_string()];
        h.extend(entries.iter().map(|(m, _)| m.to_string()));
        h
    }];
    type Getter = fn(&MetricsReport) -> f64;
    let metrics: [(&str, Getter); 3] =
        [("RMSE", |m| m.rmse), ("MAPE", |m| m.mape), ("MAD", |m| m.mad)];
    for (name, get) in metrics {
        for stat in ["Best", "Average", "Std"] {
            let mut row = vec![name.to_string(), stat.to_string()];
            for (_, agg) in entries {
                let cell = match stat {
                    "Best" => Some(get(&agg.best)),
                    "Average" => Some(get(&agg.average)),
                    _ => agg.std.as_ref().map(get),
                };
                row.push(cell.map_or_else(|| "-".to_string(), |v| v.to_string()));
            }
            rows.push(row);
        }
    }
    rows
}

pub fn comparison_csv(entries: &[(ModelKind, RunAggregate)]) -> String {
    comparison_rows(entries).iter().map(|r| r.join(",") + "\n").collect()
}

pub fn render_comparison(entries: &[(ModelKind, RunAggregate)]) -> String {
    align(&comparison_rows(entries))
}

/// Runs each model against the same dataset and master seed, writing each
/// model's files under `output_dir/<model>/` and `comparison.csv` at the
/// top. ARIMA runs its default single replication.
pub fn run_comparison(
    base: &ExperimentConfig,
    models: &[ModelKind],
    exec: Execution,
) -> Result<Vec<(ModelKind, Experiment)>> {
    let parsed = load_csv(&base.data)?;
    let dataset = SupervisedDataset::build(&parsed.series, base.train_fraction)?;
    let mut out = Vec::with_capacity(models.len());
    for &model in models {
        let mut cfg = base.clone();
        cfg.model = model;
        if model == ModelKind::Arima {
            cfg.replications = model.default_replications();
        }
        cfg.output_dir = base.output_dir.join(model.name());
        let exp = run_on_dataset(&cfg, &dataset, exec)?;
        persist(&exp, &cfg.output_dir)?;
        out.push((model, exp));
    }
    let entries: Vec<(ModelKind, RunAggregate)> = out.iter().map(|(m, e)| (*m, e.aggregate)).collect();
    fs::create_dir_all(&base.output_dir)?;
    fs::write(base.output_dir.join("comparison.csv"), comparison_csv(&entries))?;
    Ok(out)
}

/// ARIMA grid sweep on the dataset's normalized channels, so the errors
/// share a scale with the network runs.
pub fn sweep_dataset(
    dataset: &SupervisedDataset,
    train_fraction: f64,
    grid: &[ArimaSpec],
    fit: &FitConfig,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let rows: Vec<[f64; 2]> = dataset.train_rows.iter().chain(&dataset.test_rows).copied().collect();
    let open: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let close: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    arima::grid_sweep(&open, &close, train_fraction, grid, fit, seed, exec)
}
