//! Engine on/off recognition for a stopped vehicle from the spectrum of the
//! raw longitudinal acceleration.
//!
//! A running engine at idle shakes the body at multiples of its rotation
//! frequency (800 rpm gives 13.3 Hz and 26.6 Hz). Each stop is turned into an
//! amplitude spectrum on a common 0.1 Hz grid; a stop is declared "on" when
//! the peak around the second harmonic stands out from a reference band by
//! more than a threshold.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pipeline::SensorSeries;

/// 2.56 s at 100 Hz.
pub const MIN_SEGMENT_LEN: usize = 256;
pub const GRID_STEP_HZ: f64 = 0.1;
pub const GRID_MAX_HZ: f64 = 50.0;
/// Minimum FFT length; zero padding to this keeps raw bins below 0.05 Hz at
/// 100 Hz sampling.
const MIN_FFT_LEN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineState {
    On,
    Off,
}

impl EngineState {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineState::On => "on",
            EngineState::Off => "off",
        }
    }
}

impl fmt::Display for EngineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "on" => Ok(EngineState::On),
            "off" => Ok(EngineState::Off),
            other => Err(format!("unknown engine state `{other}` (expected on|off)")),
        }
    }
}

/// Known engine state over `[start_s, end_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelInterval {
    pub start_s: f64,
    pub end_s: f64,
    pub state: EngineState,
}

/// Raw acceleration recorded during one continuous stop.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineSegment {
    pub a_raw: Vec<f64>,
    pub rate_hz: f64,
    pub start_time: f64,
    pub label: Option<EngineState>,
}

impl EngineSegment {
    pub fn duration(&self) -> f64 {
        self.a_raw.len() as f64 / self.rate_hz
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    pub fn is_usable(&self) -> bool {
        self.a_raw.len() >= MIN_SEGMENT_LEN
    }
}

/// Finds maximal runs of exactly-zero speed and cuts the matching raw
/// acceleration out of `a_raw`. Runs shorter than [`MIN_SEGMENT_LEN`]
/// acceleration samples are dropped. A segment takes the label of the
/// interval containing its midpoint.
pub fn extract_segments(v: &SensorSeries, a_raw: &SensorSeries, labels: Option<&[LabelInterval]>) -> Vec<EngineSegment> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, x) in v.values.iter().enumerate() {
        match (start, *x == 0.0) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..v.len());
    }

    let to_index = |t: f64| -> usize {
        let x = ((t - a_raw.start_time) * a_raw.rate_hz - 1e-6).ceil();
        x.clamp(0.0, a_raw.len() as f64) as usize
    };
    runs.into_iter()
        .filter_map(|run| {
            let t0 = v.time_at(run.start);
            let t1 = v.time_at(run.end);
            let (i0, i1) = (to_index(t0), to_index(t1));
            if i1 < i0 + MIN_SEGMENT_LEN {
                return None;
            }
            let start_time = a_raw.time_at(i0);
            let mid = 0.5 * (start_time + a_raw.time_at(i1));
            let label = labels.and_then(|ls| {
                ls.iter()
                    .find(|l| l.start_s <= mid && mid < l.end_s)
                    .map(|l| l.state)
            });
            Some(EngineSegment {
                a_raw: a_raw.values[i0..i1].to_vec(),
                rate_hz: a_raw.rate_hz,
                start_time,
                label,
            })
        })
        .collect()
}

/// Amplitude spectrum on the common grid `0.1, 0.2, …, 50.0` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub freqs: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub n_segments_averaged: usize,
}

pub fn spectrum_grid() -> Vec<f64> {
    let n = (GRID_MAX_HZ / GRID_STEP_HZ).round() as usize;
    (1..=n).map(|k| k as f64 / 10.0).collect()
}

/// Mean-removed, Hann-windowed amplitude spectrum of one segment, scaled so
/// that a sinusoid of amplitude `A` peaks at about `A`.
pub fn segment_spectrum(seg: &EngineSegment) -> Result<SpectrumSummary> {
    let n = seg.a_raw.len();
    if n < MIN_SEGMENT_LEN {
        return Err(Error::SegmentTooShort {
            len: n,
            min: MIN_SEGMENT_LEN,
        });
    }
    let mean = seg.a_raw.iter().sum::<f64>() / n as f64;
    let nfft = n.max(MIN_FFT_LEN).next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let mut wsum = 0.0;
    for (i, x) in seg.a_raw.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
        wsum += w;
        buf[i].re = (x - mean) * w;
    }
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let half = nfft / 2;
    let raw: Vec<f64> = buf[..=half].iter().map(|c| 2.0 * c.norm() / wsum).collect();
    let df = seg.rate_hz / nfft as f64;
    let freqs = spectrum_grid();
    let amplitude = freqs
        .iter()
        .map(|f| {
            let pos = f / df;
            let i = pos.floor() as usize;
            if i >= half {
                return if (pos - half as f64).abs() < 1e-9 { raw[half] } else { 0.0 };
            }
            let frac = pos - i as f64;
            raw[i] * (1.0 - frac) + raw[i + 1] * frac
        })
        .collect();
    Ok(SpectrumSummary {
        freqs,
        amplitude,
        n_segments_averaged: 1,
    })
}

/// Per-bin arithmetic mean of spectra sharing one grid.
pub fn average_spectra(specs: &[SpectrumSummary]) -> Result<SpectrumSummary> {
    let first = specs.first().ok_or(Error::EmptyInput)?;
    let bins = first.freqs.len();
    if let Some(bad) = specs.iter().find(|s| s.amplitude.len() != bins || s.freqs != first.freqs) {
        return Err(Error::LengthMismatch {
            left: bins,
            right: bad.amplitude.len(),
        });
    }
    let mut amplitude = vec![0.0; bins];
    for s in specs {
        amplitude.iter_mut().zip(&s.amplitude).for_each(|(a, b)| *a += b);
    }
    let k = specs.len() as f64;
    amplitude.iter_mut().for_each(|a| *a /= k);
    Ok(SpectrumSummary {
        freqs: first.freqs.clone(),
        amplitude,
        n_segments_averaged: specs.iter().map(|s| s.n_segments_averaged).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSpec {
    pub target_hz: f64,
    pub band_halfwidth_hz: f64,
    /// Decision threshold on the band-peak / baseline-median ratio.
    pub threshold: f64,
    pub baseline_band: (f64, f64),
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            target_hz: 26.6,
            band_halfwidth_hz: 1.5,
            threshold: 5.0,
            baseline_band: (35.0, 45.0),
        }
    }
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        let lo = self.target_hz - self.band_halfwidth_hz;
        let hi = self.target_hz + self.band_halfwidth_hz;
        let (b0, b1) = self.baseline_band;
        if !(lo > 0.0 && hi < GRID_MAX_HZ && self.band_halfwidth_hz > 0.0) {
            return Err(Error::InvalidParameter(format!("target band [{lo}, {hi}] Hz outside (0, 50)")));
        }
        if !(b0 > 0.0 && b1 <= GRID_MAX_HZ && b1 > b0) {
            return Err(Error::InvalidParameter(format!("baseline band [{b0}, {b1}] Hz invalid")));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidParameter("threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Peak amplitude inside the target band over the median amplitude inside
/// the baseline band. Zero when the band is silent.
pub fn band_ratio(spectrum: &SpectrumSummary, spec: &ClassifierSpec) -> f64 {
    let tol = 1e-9;
    let in_band = |lo: f64, hi: f64| {
        spectrum
            .freqs
            .iter()
            .zip(&spectrum.amplitude)
            .filter(move |(f, _)| **f >= lo - tol && **f <= hi + tol)
            .map(|(_, a)| *a)
    };
    let peak = in_band(spec.target_hz - spec.band_halfwidth_hz, spec.target_hz + spec.band_halfwidth_hz)
        .fold(0.0, f64::max);
    if !(peak > 0.0) {
        return 0.0;
    }
    let mut base: Vec<f64> = in_band(spec.baseline_band.0, spec.baseline_band.1).collect();
    if base.is_empty() {
        return f64::INFINITY;
    }
    base.sort_by(f64::total_cmp);
    let m = base.len();
    let median = if m % 2 == 1 {
        base[m / 2]
    } else {
        0.5 * (base[m / 2 - 1] + base[m / 2])
    };
    if median > 0.0 {
        peak / median
    } else {
        f64::INFINITY
    }
}

pub fn classify(seg: &EngineSegment, spec: &ClassifierSpec) -> Result<EngineState> {
    let ratio = band_ratio(&segment_spectrum(seg)?, spec);
    Ok(if ratio > spec.threshold {
        EngineState::On
    } else {
        EngineState::Off
    })
}

/// Classifies every segment, in input order.
pub fn classify_all(segments: &[EngineSegment], spec: &ClassifierSpec, exec: Execution) -> Result<Vec<EngineState>> {
    exec.map_slice(segments, |s| classify(s, spec)).into_iter().collect()
}

/// Spectra of every segment, in input order.
pub fn segment_spectra(segments: &[EngineSegment], exec: Execution) -> Result<Vec<SpectrumSummary>> {
    exec.map_slice(segments, segment_spectrum).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (EngineState, EngineState)>) -> Self {
        let mut c = Confusion::default();
        for (truth, pred) in pairs {
            match (truth, pred) {
                (EngineState::On, EngineState::On) => c.tp += 1,
                (EngineState::Off, EngineState::On) => c.fp += 1,
                (EngineState::Off, EngineState::Off) => c.tn += 1,
                (EngineState::On, EngineState::Off) => c.fn_ += 1,
            }
        }
        c
    }

    /// `(TPR, PPV)`.
    pub fn rates(&self) -> Result<(f64, f64)> {
        if self.tp + self.fn_ == 0 {
            return Err(Error::NoPositives);
        }
        if self.tp + self.fp == 0 {
            return Err(Error::NoPredictedPositives);
        }
        Ok((
            self.tp as f64 / (self.tp + self.fn_) as f64,
            self.tp as f64 / (self.tp + self.fp) as f64,
        ))
    }
}

/// True-positive rate and positive predictive value over the labeled
/// segments (unlabeled ones are ignored).
pub fn evaluate_classifier(segments: &[EngineSegment], spec: &ClassifierSpec) -> Result<(f64, f64)> {
    let labeled: Vec<EngineSegment> = segments.iter().filter(|s| s.label.is_some()).cloned().collect();
    let pred = classify_all(&labeled, spec, Execution::default())?;
    Confusion::from_pairs(labeled.iter().map(|s| s.label.unwrap()).zip(pred)).rates()
}

/// Picks the threshold that maximizes `min(TPR, PPV)` on labeled segments.
/// Candidates are geometric midpoints between consecutive observed ratios;
/// among equally good candidates the middle one is returned.
pub fn calibrate_threshold(segments: &[EngineSegment], spec: &ClassifierSpec) -> Result<f64> {
    let labeled: Vec<&EngineSegment> = segments.iter().filter(|s| s.label.is_some()).collect();
    let scored: Vec<(f64, EngineState)> = labeled
        .iter()
        .map(|s| Ok((band_ratio(&segment_spectrum(s)?, spec), s.label.unwrap())))
        .collect::<Result<_>>()?;
    if !scored.iter().any(|(_, l)| *l == EngineState::On) {
        return Err(Error::NoPositives);
    }
    let mut ratios: Vec<f64> = scored.iter().map(|(r, _)| *r).filter(|r| r.is_finite() && *r > 0.0).collect();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let candidates: Vec<f64> = ratios.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    if candidates.is_empty() {
        return Err(Error::InsufficientData {
            rule: "threshold calibration needs at least two distinct ratios".into(),
        });
    }
    let score = |th: f64| {
        let c = Confusion::from_pairs(scored.iter().map(|(r, l)| {
            (*l, if *r > th { EngineState::On } else { EngineState::Off })
        }));
        c.rates().map(|(tpr, ppv)| tpr.min(ppv)).unwrap_or(0.0)
    };
    let scores: Vec<f64> = candidates.iter().map(|&c| score(c)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let optimal: Vec<f64> = candidates
        .iter()
        .zip(&scores)
        .filter(|(_, s)| **s == best)
        .map(|(c, _)| *c)
        .collect();
    Ok(optimal[optimal.len() / 2])
}
