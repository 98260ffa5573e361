//! Synthetic trips with known ground truth.
//!
//! A speed profile is assembled from constant holds, stops and raised-cosine
//! ramps, so speed and its derivative are available in closed form. Fuel flow
//! is produced by a planted estimator evaluated on the exact `(v, a)`, and
//! the raw streams are emitted at the native sensor rates with seeded noise
//! and quantization.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::engine::{EngineState, LabelInterval};
use crate::error::{Error, Result};
use crate::estimators::{Model, PbParams};
use crate::pipeline::{Quantity, SensorSeries, SyncedDataset};

pub const GRAVITY: f64 = 9.81;
pub const RATE_V_HZ: f64 = 10.0;
pub const RATE_A_HZ: f64 = 100.0;
pub const RATE_F_HZ: f64 = 20.0;

/// Peak jerk of a speed ramp, m/s³.
const MAX_JERK: f64 = 0.3;

/// Planted power-balance coefficients used when nothing else is given.
pub const DEFAULT_PLANTED_ALPHA: [f64; 4] = [0.03, 0.05, 1.5e-4, 2.5e-6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    UrbanStopGo,
    HighwayCruise,
    MixedRamp,
    /// Steady driving at one speed (km/h) for the whole trip.
    Constant(f64),
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::UrbanStopGo => f.write_str("urban_stop_go"),
            Profile::HighwayCruise => f.write_str("highway_cruise"),
            Profile::MixedRamp => f.write_str("mixed_ramp"),
            Profile::Constant(v) => write!(f, "constant:{v}"),
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "urban_stop_go" => Ok(Profile::UrbanStopGo),
            "highway_cruise" => Ok(Profile::HighwayCruise),
            "mixed_ramp" => Ok(Profile::MixedRamp),
            _ => s
                .strip_prefix("constant:")
                .and_then(|v| v.parse().ok())
                .map(Profile::Constant)
                .ok_or_else(|| {
                    format!("unknown profile `{s}` (expected urban_stop_go|highway_cruise|mixed_ramp|constant:<kmh>)")
                }),
        }
    }
}

/// Per-quantity values: velocity (km/h), acceleration (m/s²), fuel flow (l/h).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerQuantity {
    pub v: f64,
    pub a: f64,
    pub f: f64,
}

impl PerQuantity {
    /// Sensor resolutions of the reference logging unit.
    pub const RESOLUTION: PerQuantity = PerQuantity {
        v: 0.01,
        a: 0.001,
        f: 0.001,
    };
    pub const ZERO: PerQuantity = PerQuantity {
        v: 0.0,
        a: 0.0,
        f: 0.0,
    };
}

/// Sinusoidal road grade, `theta(t) = amplitude_rad * sin(2π t / period_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub amplitude_rad: f64,
    pub period_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineTone {
    pub freq_hz: f64,
    /// m/s²
    pub amplitude: f64,
}

impl Default for EngineTone {
    fn default() -> Self {
        Self {
            freq_hz: 26.6,
            amplitude: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripSpec {
    pub duration_s: f64,
    pub profile: Profile,
    pub planted_model: Model,
    /// Gaussian noise standard deviations added before quantization.
    pub noise_std: PerQuantity,
    /// Quantization steps; a zero step leaves the quantity unquantized.
    pub quantization: PerQuantity,
    pub seed: u64,
    pub idle_flow_lh: f64,
    pub engine_tone: Option<EngineTone>,
    /// Probability that the engine keeps running during a stop.
    pub engine_on_prob: f64,
    pub slope: Option<Slope>,
    /// Mean acceleration magnitude during ramps; `None` uses the profile's
    /// typical value.
    pub ramp_accel_ms2: Option<f64>,
}

impl Default for TripSpec {
    fn default() -> Self {
        Self {
            duration_s: 1800.0,
            profile: Profile::MixedRamp,
            planted_model: Model::Pb(PbParams::new(DEFAULT_PLANTED_ALPHA)),
            noise_std: PerQuantity::ZERO,
            quantization: PerQuantity::RESOLUTION,
            seed: 0,
            idle_flow_lh: 0.8,
            engine_tone: None,
            engine_on_prob: 0.7,
            slope: None,
            ramp_accel_ms2: None,
        }
    }
}

impl TripSpec {
    pub fn noiseless(mut self) -> Self {
        self.noise_std = PerQuantity::ZERO;
        self.quantization = PerQuantity::ZERO;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration_s));
        }
        for (name, q) in [("noise", self.noise_std), ("quantization", self.quantization)] {
            if [q.v, q.a, q.f].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return bad(format!("{name} values must be finite and non-negative"));
            }
        }
        if !(self.idle_flow_lh.is_finite() && self.idle_flow_lh >= 0.0) {
            return bad("idle flow must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.engine_on_prob) {
            return bad("engine-on probability must lie in [0, 1]".into());
        }
        if let Profile::Constant(v) = self.profile {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("constant speed must be non-negative, got {v}"));
            }
        }
        if let Some(r) = self.ramp_accel_ms2 {
            if !(r.is_finite() && r > 0.0) {
                return bad("ramp acceleration must be positive".into());
            }
        }
        if let Some(s) = self.slope {
            if !(s.amplitude_rad.is_finite() && s.period_s > 0.0) {
                return bad("slope period must be positive".into());
            }
        }
        if let Some(t) = self.engine_tone {
            if !(t.freq_hz > 0.0 && t.freq_hz < RATE_A_HZ / 2.0 && t.amplitude.is_finite()) {
                return bad("engine tone must lie below 50 Hz".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Hold { v: f64, dur: f64 },
    Stop { dur: f64, engine: EngineState },
    Ramp { v0: f64, v1: f64, dur: f64 },
}

impl Piece {
    fn dur(&self) -> f64 {
        match *self {
            Piece::Hold { dur, .. } | Piece::Stop { dur, .. } | Piece::Ramp { dur, .. } => dur,
        }
    }

    /// Speed (km/h) and its time derivative (km/h/s) at local time `tau`.
    fn eval(&self, tau: f64) -> (f64, f64) {
        match *self {
            Piece::Hold { v, .. } => (v, 0.0),
            Piece::Stop { .. } => (0.0, 0.0),
            Piece::Ramp { v0, v1, dur } => {
                let s = (tau / dur).clamp(0.0, 1.0);
                let dv = v1 - v0;
                let v = v0 + dv * (s - (2.0 * PI * s).sin() / (2.0 * PI));
                (v.max(0.0), dv / dur * (1.0 - (2.0 * PI * s).cos()))
            }
        }
    }
}

/// Closed-form speed profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pieces: Vec<(f64, Piece)>,
    duration: f64,
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    pieces: Vec<(f64, Piece)>,
    t: f64,
    v: f64,
    duration: f64,
    on_prob: f64,
}

impl Builder<'_> {
    fn remaining(&self) -> f64 {
        self.duration - self.t
    }

    fn push(&mut self, p: Piece) {
        self.pieces.push((self.t, p));
        self.t += p.dur();
        self.v = match p {
            Piece::Hold { v, .. } => v,
            Piece::Stop { .. } => 0.0,
            Piece::Ramp { v1, .. } => v1,
        };
    }

    /// Holds or stops until the end of the trip.
    fn finish(&mut self) {
        let dur = self.remaining();
        if dur > 0.0 {
            if let Some((_, Piece::Stop { dur: last, .. })) = self.pieces.last_mut() {
                *last += dur;
                self.t += dur;
            } else if self.v == 0.0 {
                let engine = self.engine();
                self.push(Piece::Stop { dur, engine });
            } else {
                self.push(Piece::Hold { v: self.v, dur });
            }
        }
    }

    fn engine(&mut self) -> EngineState {
        if self.rng.random_bool(self.on_prob) {
            EngineState::On
        } else {
            EngineState::Off
        }
    }

    /// Ramps to `v1` and then holds (or stops) for `hold` seconds, if the
    /// trip has room for it. Returns false when the trip was closed instead.
    fn go(&mut self, v1: f64, accel_ms2: f64, hold: f64) -> bool {
        let dv = (v1 - self.v).abs() / 3.6;
        let ramp = (dv / accel_ms2).max((4.0 * PI * PI * dv / MAX_JERK).cbrt()).max(1.0);
        if ramp + hold > self.remaining() {
            self.finish();
            return false;
        }
        self.push(Piece::Ramp {
            v0: self.v,
            v1,
            dur: ramp,
        });
        if v1 == 0.0 {
            let engine = self.engine();
            self.push(Piece::Stop { dur: hold, engine });
        } else {
            self.push(Piece::Hold { v: v1, dur: hold });
        }
        true
    }
}

impl SpeedProfile {
    pub fn build(profile: Profile, duration: f64, ramp_accel: Option<f64>, on_prob: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut b = Builder {
            rng,
            pieces: Vec::new(),
            t: 0.0,
            v: 0.0,
            duration,
            on_prob,
        };
        match profile {
            Profile::Constant(v) => {
                b.v = v;
                b.finish();
            }
            Profile::HighwayCruise => {
                let acc = ramp_accel.unwrap_or(0.5);
                let v0 = b.rng.random_range(80.0..110.0);
                let hold = b.rng.random_range(30.0..90.0_f64).min(duration);
                b.push(Piece::Hold { v: v0, dur: hold });
                loop {
                    let v1 = b.rng.random_range(70.0..125.0);
                    let hold = b.rng.random_range(40.0..180.0);
                    if !b.go(v1, acc, hold) {
                        break;
                    }
                }
            }
            Profile::UrbanStopGo => {
                let acc = ramp_accel.unwrap_or(1.0);
                let first = b.rng.random_range(10.0..30.0_f64).min(duration);
                let engine = b.engine();
                b.push(Piece::Stop { dur: first, engine });
                loop {
                    let cruise = b.rng.random_range(25.0..55.0);
                    let hold = b.rng.random_range(15.0..60.0);
                    if !b.go(cruise, acc, hold) {
                        break;
                    }
                    if b.rng.random_bool(0.3) {
                        let v1 = b.rng.random_range(15.0..60.0);
                        let hold = b.rng.random_range(10.0..40.0);
                        if !b.go(v1, acc, hold) {
                            break;
                        }
                    }
                    let stop = b.rng.random_range(10.0..45.0);
                    if !b.go(0.0, acc * 1.2, stop) {
                        break;
                    }
                }
            }
            Profile::MixedRamp => {
                let acc = ramp_accel.unwrap_or(0.8);
                let first = b.rng.random_range(10.0..30.0_f64).min(duration);
                let engine = b.engine();
                b.push(Piece::Stop { dur: first, engine });
                'trip: loop {
                    let highway = b.rng.random_bool(0.4);
                    let legs = b.rng.random_range(1..4);
                    for _ in 0..legs {
                        let (v1, hold) = if highway {
                            (b.rng.random_range(70.0..120.0), b.rng.random_range(30.0..120.0))
                        } else {
                            (b.rng.random_range(20.0..60.0), b.rng.random_range(10.0..50.0))
                        };
                        if !b.go(v1, acc, hold) {
                            break 'trip;
                        }
                    }
                    let stop = b.rng.random_range(10.0..40.0);
                    if !b.go(0.0, acc, stop) {
                        break;
                    }
                }
            }
        }
        Self {
            pieces: b.pieces,
            duration,
        }
    }

    fn piece_at(&self, t: f64) -> (f64, &Piece) {
        let idx = self.pieces.partition_point(|(t0, _)| *t0 <= t).saturating_sub(1);
        let (t0, p) = &self.pieces[idx];
        (*t0, p)
    }

    /// Speed (km/h) and its derivative (km/h/s).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (t0, p) = self.piece_at(t);
        p.eval(t - t0)
    }

    /// Engine state during a stop, `None` while moving.
    pub fn stop_state(&self, t: f64) -> Option<EngineState> {
        match self.piece_at(t).1 {
            Piece::Stop { engine, .. } => Some(*engine),
            _ => None,
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Engine-state intervals, one per stop.
    pub fn labels(&self) -> Vec<LabelInterval> {
        self.pieces
            .iter()
            .filter_map(|(t0, p)| match p {
                Piece::Stop { dur, engine } => Some(LabelInterval {
                    start_s: *t0,
                    end_s: t0 + dur,
                    state: *engine,
                }),
                _ => None,
            })
            .collect()
    }
}

/// Raw streams plus the noise-free truth they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTrip {
    pub v_raw: SensorSeries,
    pub a_raw: SensorSeries,
    pub f_raw: SensorSeries,
    /// Exact `(v, a, f)` at the 10 Hz velocity instants.
    pub truth: SyncedDataset,
    pub labels: Vec<LabelInterval>,
}

struct Truth<'a> {
    spec: &'a TripSpec,
    profile: SpeedProfile,
}

impl Truth<'_> {
    fn v(&self, t: f64) -> f64 {
        self.profile.eval(t).0
    }

    /// Gravity-inclusive longitudinal acceleration, without engine vibration.
    fn a(&self, t: f64) -> f64 {
        let grade = self
            .spec
            .slope
            .map(|s| GRAVITY * (s.amplitude_rad * (2.0 * PI * t / s.period_s).sin()).sin())
            .unwrap_or(0.0);
        self.profile.eval(t).1 / 3.6 + grade
    }

    fn f(&self, t: f64) -> Result<f64> {
        match self.profile.stop_state(t) {
            Some(EngineState::On) => Ok(self.spec.idle_flow_lh),
            Some(EngineState::Off) => Ok(0.0),
            None => self.spec.planted_model.predict(self.v(t), self.a(t)),
        }
    }
}

fn quantize(x: f64, step: f64) -> f64 {
    if step > 0.0 {
        (x / step).round() * step
    } else {
        x
    }
}

fn samples(duration: f64, rate: f64) -> usize {
    ((duration * rate).round() as usize).max(1)
}

fn noise(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    if std > 0.0 {
        Normal::new(0.0, std).map(|d| d.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    }
}

/// Generates one trip. All randomness derives from `spec.seed`.
pub fn generate_trip(spec: &TripSpec) -> Result<SyntheticTrip> {
    spec.validate()?;
    let stream = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(spec.seed);
        r.set_stream(k);
        r
    };
    let profile = SpeedProfile::build(
        spec.profile,
        spec.duration_s,
        spec.ramp_accel_ms2,
        spec.engine_on_prob,
        &mut stream(0),
    );
    let truth = Truth { spec, profile };
    let (nv, na, nf) = (
        samples(spec.duration_s, RATE_V_HZ),
        samples(spec.duration_s, RATE_A_HZ),
        samples(spec.duration_s, RATE_F_HZ),
    );
    let (q, s) = (spec.quantization, spec.noise_std);

    let mut rng = stream(1);
    let v_raw: Vec<f64> = (0..nv)
        .map(|i| {
            let v = truth.v(i as f64 / RATE_V_HZ);
            if v > 0.0 {
                quantize((v + noise(&mut rng, s.v)).max(0.0), q.v)
            } else {
                0.0
            }
        })
        .collect();

    let mut rng = stream(2);
    let a_raw: Vec<f64> = (0..na)
        .map(|i| {
            let t = i as f64 / RATE_A_HZ;
            let tone = match (spec.engine_tone, truth.profile.stop_state(t)) {
                (Some(tone), Some(EngineState::On)) => tone.amplitude * (2.0 * PI * tone.freq_hz * t).sin(),
                _ => 0.0,
            };
            quantize(truth.a(t) + tone + noise(&mut rng, s.a), q.a)
        })
        .collect();

    let mut rng = stream(3);
    let f_raw: Vec<f64> = (0..nf)
        .map(|i| {
            let f = truth.f(i as f64 / RATE_F_HZ)?;
            Ok(if f > 0.0 {
                quantize((f + noise(&mut rng, s.f)).max(0.0), q.f)
            } else {
                0.0
            })
        })
        .collect::<Result<_>>()?;

    let t: Vec<f64> = (0..nv).map(|i| i as f64 / RATE_V_HZ).collect();
    let truth_ds = SyncedDataset {
        v: t.iter().map(|&t| truth.v(t)).collect(),
        a: t.iter().map(|&t| truth.a(t)).collect(),
        f: t.iter().map(|&t| truth.f(t)).collect::<Result<_>>()?,
        t,
    };
    Ok(SyntheticTrip {
        v_raw: SensorSeries::new(Quantity::Velocity, 0.0, RATE_V_HZ, v_raw)?,
        a_raw: SensorSeries::new(Quantity::Acceleration, 0.0, RATE_A_HZ, a_raw)?,
        f_raw: SensorSeries::new(Quantity::FuelFlow, 0.0, RATE_F_HZ, f_raw)?,
        truth: truth_ds,
        labels: truth.profile.labels(),
    })
}
