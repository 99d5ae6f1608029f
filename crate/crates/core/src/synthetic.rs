//! Seeded synthetic series: ARMA simulation, noiseless sines and a
//! range-bound daily index with realistic open/close structure.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::marketdata::{OhlcRecord, OhlcSeries};
use crate::Result;

/// Simulates `y_t = c + sum ar_i y_{t-i} + sum ma_j e_{t-j} + e_t` with
/// Gaussian innovations, discarding `burn_in` leading values.
pub fn simulate_arma(
    ar: &[f64],
    ma: &[f64],
    intercept: f64,
    sigma: f64,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    let total = n + burn_in;
    let mut y = vec![0.0; total];
    let mut e = vec![0.0; total];
    for t in 0..total {
        e[t] = noise.sample(&mut rng);
        let mut v = intercept + e[t];
        for (i, a) in ar.iter().enumerate() {
            if t > i {
                v += a * y[t - i - 1];
            }
        }
        for (j, m) in ma.iter().enumerate() {
            if t > j {
                v += m * e[t - j - 1];
            }
        }
        y[t] = v;
    }
    y.split_off(burn_in)
}

/// Consecutive weekdays starting at `start` (moved forward to a weekday).
pub fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 1, 2).expect("valid date")
}

/// Noiseless sine with `open = close = level + amplitude * sin(2 pi t / period)`.
pub fn sine_series(n: usize, period: f64, level: f64, amplitude: f64) -> Result<OhlcSeries> {
    let records = trading_days(default_start(), n)
        .into_iter()
        .enumerate()
        .map(|(t, date)| {
            let v = level + amplitude * (std::f64::consts::TAU * t as f64 / period).sin();
            OhlcRecord { date, open: v, close: v }
        })
        .collect();
    OhlcSeries::new("SINE", records)
}

/// A daily bar with the columns of a Yahoo export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
}

/// A mean-reverting stock index.
///
/// The log close follows a slow Ornstein-Uhlenbeck walk around `level`;
/// each open is the previous close plus a small overnight gap.
pub fn index_bars(n: usize, level: f64, seed: u64) -> Vec<DailyBar> {
    const REVERSION: f64 = 0.01;
    const DAILY_VOL: f64 = 0.008;
    const GAP_VOL: f64 = 0.002;
    const RANGE_VOL: f64 = 0.003;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let mu = level.ln();
    let mut log_close = mu;
    let mut prev_close = level;
    trading_days(default_start(), n)
        .into_iter()
        .map(|date| {
            let open = prev_close * (GAP_VOL * z.sample(&mut rng)).exp();
            log_close += REVERSION * (mu - log_close) + DAILY_VOL * z.sample(&mut rng);
            let close = log_close.exp();
            let top = open.max(close) * (1.0 + RANGE_VOL * z.sample(&mut rng).abs());
            let bottom = open.min(close) * (1.0 - RANGE_VOL * z.sample(&mut rng).abs());
            let volume = (2.0e8 * (0.3 * z.sample(&mut rng)).exp()) as u64;
            prev_close = close;
            let r4 = |x: f64| (x * 1e4).round() / 1e4;
            DailyBar {
                date,
                open: r4(open),
                high: r4(top),
                low: r4(bottom),
                close: r4(close),
                volume,
            }
        })
        .collect()
}

/// Renders bars as a Yahoo-style CSV
/// (`Date,Open,High,Low,Close,Adj Close,Volume`).
pub fn bars_csv(bars: &[DailyBar]) -> String {
    let mut s = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
    for b in bars {
        s.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{}\n",
            b.date, b.open, b.high, b.low, b.close, b.close, b.volume
        ));
    }
    s
}
