use std::f64::consts::PI;

use super::SensorSeries;
use crate::error::{Error, Result};

/// Minimum number of samples accepted by [`zero_phase_lowpass`].
pub const MIN_FILTER_LEN: usize = 10;

/// Low-pass with two coincident real poles at `cutoff_hz` and unity DC gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub cutoff_hz: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self { cutoff_hz: 3.0 }
    }
}

impl FilterSpec {
    pub const POLE_COUNT: usize = 2;

    pub fn new(cutoff_hz: f64) -> Self {
        Self { cutoff_hz }
    }

    pub fn validate(&self, rate_hz: f64) -> Result<()> {
        let nyquist_hz = rate_hz / 2.0;
        if !(self.cutoff_hz > 0.0 && self.cutoff_hz < nyquist_hz) {
            return Err(Error::InvalidCutoff {
                cutoff_hz: self.cutoff_hz,
                nyquist_hz,
            });
        }
        Ok(())
    }

    /// Time constant of one pole, 1 / (2π fc).
    pub fn time_constant(&self) -> f64 {
        1.0 / (2.0 * PI * self.cutoff_hz)
    }
}

/// First-order section from the bilinear transform of `1 / (1 + s/ωc)`,
/// pre-warped so the discrete -3 dB point lands exactly on the cutoff.
#[derive(Debug, Clone, Copy)]
struct FirstOrder {
    b0: f64,
    b1: f64,
    a1: f64,
}

impl FirstOrder {
    fn design(cutoff_hz: f64, rate_hz: f64) -> Self {
        let k = (PI * cutoff_hz / rate_hz).tan();
        let norm = 1.0 + k;
        Self {
            b0: k / norm,
            b1: k / norm,
            a1: (k - 1.0) / norm,
        }
    }

    /// Runs the section in place (transposed direct form II), starting from
    /// the steady state for a constant input equal to the first sample.
    fn run(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let mut state = (self.b1 - self.a1) * x0;
        for xi in x.iter_mut() {
            let input = *xi;
            let y = self.b0 * input + state;
            state = self.b1 * input - self.a1 * y;
            *xi = y;
        }
    }
}

fn run_double_pole(section: &FirstOrder, x: &mut [f64]) {
    section.run(x);
    section.run(x);
}

/// Zero-phase low-pass filter: the two-pole section runs forward, then over
/// the time-reversed result. The net magnitude response is the square of the
/// single-pass response, i.e. 1/4 at the cutoff, with no phase shift.
///
/// Both ends are padded by odd reflection over three pole time constants
/// before filtering and trimmed afterwards. The forward-backward and
/// backward-forward orders are averaged; they differ only in the edge
/// transients, and the average commutes exactly with time reversal.
pub fn zero_phase_lowpass(series: &SensorSeries, spec: &FilterSpec) -> Result<SensorSeries> {
    let n = series.values.len();
    if n < MIN_FILTER_LEN {
        return Err(Error::SeriesTooShort {
            len: n,
            min: MIN_FILTER_LEN,
        });
    }
    spec.validate(series.rate_hz)?;
    let section = FirstOrder::design(spec.cutoff_hz, series.rate_hz);

    let pad = ((3.0 * spec.time_constant() * series.rate_hz).ceil() as usize).clamp(1, n - 1);
    let x = &series.values;
    let mut buf = Vec::with_capacity(n + 2 * pad);
    buf.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    buf.extend_from_slice(x);
    buf.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    let mut fwd = buf.clone();
    run_double_pole(&section, &mut fwd);
    fwd.reverse();
    run_double_pole(&section, &mut fwd);
    fwd.reverse();

    let mut bwd = buf;
    bwd.reverse();
    run_double_pole(&section, &mut bwd);
    bwd.reverse();
    run_double_pole(&section, &mut bwd);

    let out = fwd[pad..pad + n]
        .iter()
        .zip(&bwd[pad..pad + n])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    Ok(series.with_values(out))
}
