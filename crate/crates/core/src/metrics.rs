//! Forecast accuracy measures.
//!
//! All functions take `(actual, forecast)` slices of equal, nonzero length.
//! MAPE is reported in percent and is not clamped; values well above 100
//! are legitimate when actuals sit close to zero (as they do on min-max
//! normalized prices).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn check(actual: &[f64], forecast: &[f64]) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            got: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    let sum: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| (a - f) * (a - f))
        .sum();
    Ok(sum / actual.len() as f64)
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    mse(actual, forecast).map(f64::sqrt)
}

/// Mean absolute percentage error, in percent. Fails on any zero actual.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    let mut sum = 0.0;
    for (i, (a, f)) in actual.iter().zip(forecast).enumerate() {
        if *a == 0.0 {
            return Err(Error::ZeroActual(i));
        }
        sum += ((a - f) / a).abs();
    }
    Ok(100.0 * sum / actual.len() as f64)
}

/// Mean absolute deviation of the forecast from the actuals, i.e. the mean
/// absolute forecast error.
pub fn mad(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    let sum: f64 = actual.iter().zip(forecast).map(|(a, f)| (a - f).abs()).sum();
    Ok(sum / actual.len() as f64)
}

/// The four accuracy measures for one forecast, or an aggregate of several.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse: f64,
    /// Percent.
    pub mape: f64,
    pub mad: f64,
    pub mse: f64,
    /// Sample count for a single forecast; number of runs for aggregates.
    pub n: usize,
}

impl MetricsReport {
    pub fn compute(actual: &[f64], forecast: &[f64]) -> Result<Self> {
        let mse = mse(actual, forecast)?;
        Ok(MetricsReport {
            rmse: mse.sqrt(),
            mape: mape(actual, forecast)?,
            mad: mad(actual, forecast)?,
            mse,
            n: actual.len(),
        })
    }

    /// Metric values in display order: RMSE, MAPE, MAD, MSE.
    pub fn values(&self) -> [f64; 4] {
        [self.rmse, self.mape, self.mad, self.mse]
    }

    pub(crate) fn from_values(v: [f64; 4], n: usize) -> Self {
        MetricsReport {
            rmse: v[0],
            mape: v[1],
            mad: v[2],
            mse: v[3],
            n,
        }
    }
}

/// Averages the open- and close-channel reports metric by metric.
///
/// `mse` is the mean of the channel MSEs, so it is generally not the square
/// of the averaged RMSE.
pub fn channel_average(open: &MetricsReport, close: &MetricsReport) -> MetricsReport {
    let (a, b) = (open.values(), close.values());
    let mut v = [0.0; 4];
    for k in 0..4 {
        v[k] = (a[k] + b[k]) / 2.0;
    }
    MetricsReport::from_values(v, open.n.max(close.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rmse_hand_values() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let r = rmse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!((r - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r - 0.816497).abs() < 1e-6);
        let a = [0.3, -1.2, 5.0];
        let f = [1.0, 0.0, 4.5];
        assert_eq!(rmse(&a, &f).unwrap(), rmse(&f, &a).unwrap());
    }

    #[test]
    fn mape_hand_values() {
        let m = mape(&[100.0, 200.0], &[110.0, 180.0]).unwrap();
        assert!((m - 10.0).abs() < 1e-12);
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!(matches!(
            mape(&[1.0, 0.0], &[1.0, 0.5]),
            Err(Error::ZeroActual(1))
        ));
    }

    #[test]
    fn mape_above_one_hundred_is_kept() {
        let m = mape(&[0.01], &[0.05]).unwrap();
        assert!((m - 400.0).abs() < 1e-9);
    }

    #[test]
    fn mad_hand_values() {
        assert!((mad(&[1.0, 2.0], &[1.5, 2.5]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mad(&[7.0], &[7.0]).unwrap(), 0.0);
    }

    #[test]
    fn mse_hand_values() {
        assert_eq!(mse(&[1.0], &[1.0]).unwrap(), 0.0);
        let m = mse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(rmse(&[], &[]), Err(Error::Empty)));
        assert!(matches!(
            mad(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { expected: 1, got: 2 })
        ));
    }

    fn report(rmse: f64, mape: f64, mad: f64, mse: f64) -> MetricsReport {
        MetricsReport { rmse, mape, mad, mse, n: 10 }
    }

    #[test]
    fn channel_average_rules() {
        let a = report(0.1, 50.0, 0.08, 0.01);
        let b = report(0.3, 150.0, 0.2, 0.09);
        let avg = channel_average(&a, &b);
        assert!((avg.rmse - 0.2).abs() < 1e-15);
        assert!((avg.mape - 100.0).abs() < 1e-12);
        assert!((avg.mse - 0.05).abs() < 1e-15);
        assert_eq!(avg, channel_average(&b, &a));
        assert_eq!(channel_average(&a, &a), a);
    }

    proptest! {
        #[test]
        fn power_mean_and_identities(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..100)
        ) {
            let (a, f): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = rmse(&a, &f).unwrap();
            prop_assert!(r + 1e-12 >= mad(&a, &f).unwrap());
            prop_assert!((mse(&a, &f).unwrap() - r * r).abs() <= 1e-12 * (1.0 + r * r));
        }

        #[test]
        fn scaling_behaviour(
            pairs in prop::collection::vec((0.5f64..10.0, 0.5f64..10.0), 1..50),
            k in 0.1f64..10.0,
        ) {
            let (a, f): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let ka: Vec<f64> = a.iter().map(|x| k * x).collect();
            let kf: Vec<f64> = f.iter().map(|x| k * x).collect();
            let r = rmse(&a, &f).unwrap();
            prop_assert!((rmse(&ka, &kf).unwrap() - k * r).abs() <= 1e-9 * (1.0 + k * r));
            let m = mape(&a, &f).unwrap();
            prop_assert!((mape(&ka, &kf).unwrap() - m).abs() <= 1e-9 * (1.0 + m));
        }
    }
}
