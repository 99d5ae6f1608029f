//! ARIMA(p, d, q) fitted by conditional sum of squares.
//!
//! After differencing `d` times the model is
//!
//! ```text
//! y_t = c + sum_i ar_i * y_{t-i} + sum_j ma_j * e_{t-j} + e_t
//! ```
//!
//! with pre-sample residuals fixed at zero. The CSS criterion is minimized
//! with the crate's own SOS engine inside a box: AR and MA coefficients in
//! `[-1, 1]`, the intercept within the range of the differenced series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metaheuristics::{derive_seed, sos_run_with, FnObjective, RngStream, SosConfig};
use crate::metrics::{channel_average, MetricsReport};
use crate::{marketdata, Error, Execution, Result};

/// Loss assigned to parameter vectors whose residual recursion overflows.
const DIVERGED_LOSS: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaSpec {
    pub const fn new(p: usize, d: usize, q: usize) -> Self {
        ArimaSpec { p, d, q }
    }

    /// Number of leading residuals that are conditioned away.
    fn lag(&self) -> usize {
        self.p.max(self.q)
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.d, self.q)
    }
}

impl FromStr for ArimaSpec {
    type Err = Error;

    /// Parses `"p,d,q"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidConfig(format!("ARIMA order must be p,d,q, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: Vec<usize> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Ok(ArimaSpec::new(n[0], n[1], n[2]))
    }
}

/// The eleven orders examined in the original study, in table order.
pub const DEFAULT_GRID: [ArimaSpec; 11] = [
    ArimaSpec::new(1, 0, 0),
    ArimaSpec::new(1, 0, 1),
    ArimaSpec::new(2, 0, 0),
    ArimaSpec::new(0, 0, 1),
    ArimaSpec::new(0, 0, 2),
    ArimaSpec::new(1, 1, 0),
    ArimaSpec::new(0, 1, 1),
    ArimaSpec::new(1, 1, 2),
    ArimaSpec::new(2, 1, 0),
    ArimaSpec::new(2, 1, 2),
    ArimaSpec::new(2, 1, 1),
];

/// Parses `"p,d,q;p,d,q;..."`.
pub fn parse_grid(s: &str) -> Result<Vec<ArimaSpec>> {
    let grid: Vec<ArimaSpec> = s
        .split(';')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty ARIMA grid".into()));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub intercept: f64,
}

impl ArimaModel {
    pub fn new(spec: ArimaSpec, ar: Vec<f64>, ma: Vec<f64>, intercept: f64) -> Result<Self> {
        if ar.len() != spec.p {
            return Err(Error::LengthMismatch { expected: spec.p, got: ar.len() });
        }
        if ma.len() != spec.q {
            return Err(Error::LengthMismatch { expected: spec.q, got: ma.len() });
        }
        Ok(ArimaModel { spec, ar, ma, intercept })
    }
}

/// Applies the first-difference operator `d` times.
pub fn difference(series: &[f64], d: usize) -> Result<Vec<f64>> {
    if series.len() <= d {
        return Err(Error::SeriesTooShort { needed: d + 1, got: series.len() });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Inverse of [`difference`]: `initials` are the first `d` values of the
/// original series.
pub fn integrate(diffed: &[f64], initials: &[f64]) -> Vec<f64> {
    let d = initials.len();
    // First value of each k-th difference of the original, k = 0..d.
    let mut heads = Vec::with_capacity(d);
    let mut level = initials.to_vec();
    for _ in 0..d {
        heads.push(level[0]);
        level = level.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let mut cur = diffed.to_vec();
    for head in heads.into_iter().rev() {
        let mut next = Vec::with_capacity(cur.len() + 1);
        let mut acc = head;
        next.push(acc);
        for v in cur {
            acc += v;
            next.push(acc);
        }
        cur = next;
    }
    cur
}

/// Residuals of the CSS recursion on an already differenced series; the
/// first `max(p, q)` entries are zero.
fn residuals(model: &ArimaModel, y: &[f64]) -> Vec<f64> {
    let lag = model.spec.lag();
    let mut e = vec![0.0; y.len()];
    for t in lag..y.len() {
        let mut pred = model.intercept;
        for (i, a) in model.ar.iter().enumerate() {
            pred += a * y[t - i - 1];
        }
        for (j, m) in model.ma.iter().enumerate() {
            pred += m * e[t - j - 1];
        }
        e[t] = y[t] - pred;
    }
    e
}

/// Conditional sum of squared residuals on an already differenced series.
pub fn css_loss(model: &ArimaModel, y: &[f64]) -> f64 {
    let lag = model.spec.lag();
    residuals(model, y)[lag.min(y.len())..].iter().map(|e| e * e).sum()
}

/// Settings for the SOS search inside [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub population: usize,
    pub iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { population: 30, iterations: 500 }
    }
}

/// Maps unit-cube genes onto the coefficient box. Out-of-cube genes are
/// clamped to the box faces.
struct ParamBox {
    spec: ArimaSpec,
    lo: f64,
    hi: f64,
}

impl ParamBox {
    fn new(spec: ArimaSpec, y: &[f64]) -> Self {
        let (mut lo, mut hi) = y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        ParamBox { spec, lo, hi }
    }

    fn model(&self, genes: &[f64]) -> ArimaModel {
        let coef = |g: f64| 2.0 * g.clamp(0.0, 1.0) - 1.0;
        let (p, q) = (self.spec.p, self.spec.q);
        ArimaModel {
            spec: self.spec,
            ar: genes[..p].iter().map(|g| coef(*g)).collect(),
            ma: genes[p..p + q].iter().map(|g| coef(*g)).collect(),
            intercept: self.lo + genes[p + q].clamp(0.0, 1.0) * (self.hi - self.lo),
        }
    }

    /// Genes of the intercept-only model at `mean`.
    fn baseline(&self, mean: f64) -> Vec<f64> {
        let mut g = vec![0.5; self.spec.p + self.spec.q];
        g.push((mean - self.lo) / (self.hi - self.lo));
        g
    }
}

/// Fits `spec` to `series` (original scale) by minimizing CSS with SOS.
///
/// The initial ecosystem contains the intercept-only model at the mean of
/// the differenced series, so the fit is never worse than that baseline.
pub fn fit(series: &[f64], spec: ArimaSpec, config: &FitConfig, rng: &mut RngStream) -> Result<ArimaModel> {
    let needed = spec.p + spec.q + spec.d + 2;
    if series.len() < needed {
        return Err(Error::SeriesTooShort { needed, got: series.len() });
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let y = difference(series, spec.d)?;
    let bounds = ParamBox::new(spec, &y);
    let objective = FnObjective::new(spec.p + spec.q + 1, |g: &[f64]| {
        let loss = css_loss(&bounds.model(g), &y);
        if loss.is_finite() { loss } else { DIVERGED_LOSS }
    });
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sos = SosConfig {
        population: config.population,
        iterations: config.iterations,
        ..SosConfig::default()
    };
    let trace = sos_run_with(&objective, &sos, rng, Execution::Sequential, &[bounds.baseline(mean)])?;
    Ok(bounds.model(&trace.best_genes))
}

/// Conditional expectation of the next value given `history` (original
/// scale).
pub fn forecast_one_step(model: &ArimaModel, history: &[f64]) -> Result<f64> {
    let spec = model.spec;
    let needed = spec.p + spec.d;
    if history.len() < needed {
        return Err(Error::SeriesTooShort { needed, got: history.len() });
    }
    // Last value of every lower-order difference, for integration.
    let mut tail_sum = 0.0;
    let mut level = history.to_vec();
    for _ in 0..spec.d {
        tail_sum += level[level.len() - 1];
        level = level.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let y = level;
    let e = residuals(model, &y);
    let n = y.len();
    let mut next = model.intercept;
    for (i, a) in model.ar.iter().enumerate() {
        next += a * y[n - i - 1];
    }
    for (j, m) in model.ma.iter().enumerate() {
        if n > j {
            next += m * e[n - j - 1];
        }
    }
    Ok(next + tail_sum)
}

/// One-step-ahead forecasts over `test`, revealing each actual value after
/// it is forecast. The model is not refitted.
pub fn rolling_forecast(model: &ArimaModel, train: &[f64], test: &[f64]) -> Result<Vec<f64>> {
    let mut history = train.to_vec();
    history.reserve(test.len());
    let mut out = Vec::with_capacity(test.len());
    for &actual in test {
        out.push(forecast_one_step(model, &history)?);
        history.push(actual);
    }
    Ok(out)
}

/// Fits on the first `floor(n * split)` values and walks the rest.
pub fn rolling_evaluate(
    series: &[f64],
    spec: ArimaSpec,
    split: f64,
    config: &FitConfig,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, MetricsReport)> {
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::InvalidFraction(split));
    }
    let cut = marketdata::split_index(series.len(), split);
    if cut == 0 || cut >= series.len() {
        return Err(Error::SeriesTooShort { needed: 2, got: series.len() });
    }
    let (train, test) = series.split_at(cut);
    let model = fit(train, spec, config, rng)?;
    let preds = rolling_forecast(&model, train, test)?;
    let report = MetricsReport::compute(test, &preds)?;
    Ok((preds, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub spec: ArimaSpec,
    pub metrics: MetricsReport,
}

/// Rolling evaluation of every spec on both channels; each row holds the
/// channel-averaged metrics. Entry `k` fits with seeds derived from
/// `(seed, 2k)` for open and `(seed, 2k + 1)` for close.
pub fn grid_sweep(
    open: &[f64],
    close: &[f64],
    split: f64,
    grid: &[ArimaSpec],
    config: &FitConfig,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(usize, ArimaSpec)> = grid.iter().copied().enumerate().collect();
    exec.try_map(&jobs, |&(k, spec)| {
        let mut ro = RngStream::new(derive_seed(seed, 2 * k as u64));
        let mut rc = RngStream::new(derive_seed(seed, 2 * k as u64 + 1));
        let (_, mo) = rolling_evaluate(open, spec, split, config, &mut ro)?;
        let (_, mc) = rolling_evaluate(close, spec, split, config, &mut rc)?;
        Ok(SweepRow { spec, metrics: channel_average(&mo, &mc) })
    })
}

/// Index of the lowest-RMSE row; ties go to the earlier row.
pub fn best_by_rmse(rows: &[SweepRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if best.is_none_or(|b| r.metrics.rmse < rows[b].metrics.rmse) {
            best = Some(i);
        }
    }
    best
}

/// CSV with columns `p,d,q,rmse,mape,mad`, rows in grid order.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("p,d,q,rmse,mape,mad\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.spec.p, r.spec.d, r.spec.q, r.metrics.rmse, r.metrics.mape, r.metrics.mad
        ));
    }
    s
}
