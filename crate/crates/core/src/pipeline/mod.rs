//! Conditioning of raw sensor streams into a synchronized 10 Hz dataset.

mod filter;
mod spline;
mod sync;

pub use filter::{zero_phase_lowpass, FilterSpec};
pub use spline::NaturalSpline;
pub use sync::{exclude_stopped, resample_and_sync, DEFAULT_V_EPS_KMH};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Physical quantity carried by a raw stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// km/h
    Velocity,
    /// m/s², gravity-inclusive longitudinal
    Acceleration,
    /// l/h
    FuelFlow,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Velocity => "velocity",
            Quantity::Acceleration => "acceleration",
            Quantity::FuelFlow => "fuel_flow",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "velocity" => Ok(Quantity::Velocity),
            "acceleration" => Ok(Quantity::Acceleration),
            "fuel_flow" => Ok(Quantity::FuelFlow),
            other => Err(format!("unknown quantity `{other}`")),
        }
    }
}

/// A uniformly sampled scalar stream. Sample `i` sits at
/// `start_time + i / rate_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSeries {
    pub start_time: f64,
    pub rate_hz: f64,
    pub values: Vec<f64>,
    pub quantity: Quantity,
}

impl SensorSeries {
    pub fn new(quantity: Quantity, start_time: f64, rate_hz: f64, values: Vec<f64>) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::InvalidRate(rate_hz));
        }
        Ok(Self {
            start_time,
            rate_hz,
            values,
            quantity,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.rate_hz
    }

    /// Time of the last sample.
    pub fn end_time(&self) -> f64 {
        self.time_at(self.values.len().saturating_sub(1))
    }

    pub fn timestamps(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.time_at(i)).collect()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            ..self.clone()
        }
    }
}

/// Synchronized `(t, v, a, f)` records.
///
/// Produced at 10 Hz by [`resample_and_sync`]; subsets (after
/// [`exclude_stopped`] or a train/test split) keep their original timestamps
/// and are no longer uniformly spaced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyncedDataset {
    pub t: Vec<f64>,
    /// km/h
    pub v: Vec<f64>,
    /// m/s²
    pub a: Vec<f64>,
    /// l/h
    pub f: Vec<f64>,
}

impl SyncedDataset {
    /// Builds a dataset, checking column lengths, timestamp order and sign
    /// constraints.
    pub fn new(t: Vec<f64>, v: Vec<f64>, a: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        for len in [v.len(), a.len(), f.len()] {
            if len != t.len() {
                return Err(Error::LengthMismatch {
                    left: t.len(),
                    right: len,
                });
            }
        }
        if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotonicTime { index: i + 1 });
        }
        if let Some(i) = v.iter().position(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "velocity must be finite and non-negative (record {i})"
            )));
        }
        if let Some(i) = f.iter().position(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "fuel flow must be finite and non-negative (record {i})"
            )));
        }
        if let Some(i) = a.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "acceleration must be finite (record {i})"
            )));
        }
        Ok(Self { t, v, a, f })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Keeps the records at `indices` (which must be increasing).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            t: indices.iter().map(|&i| self.t[i]).collect(),
            v: indices.iter().map(|&i| self.v[i]).collect(),
            a: indices.iter().map(|&i| self.a[i]).collect(),
            f: indices.iter().map(|&i| self.f[i]).collect(),
        }
    }

    /// Keeps the records for which `keep(v, a, f)` holds.
    pub fn filter<P: Fn(f64, f64, f64) -> bool>(&self, keep: P) -> Self {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| keep(self.v[i], self.a[i], self.f[i]))
            .collect();
        self.select(&idx)
    }

    /// True when consecutive timestamps differ by `step` within `tol`.
    pub fn is_uniform(&self, step: f64, tol: f64) -> bool {
        self.t.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= tol)
    }
}
