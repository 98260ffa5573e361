//! Testing error, integral error and error-over-tank.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Relative slack on tank boundaries, absorbing summation round-off.
const TANK_TOL: f64 = 1e-9;

/// Default tank size in liters.
pub const DEFAULT_TANK_L: f64 = 10.4;

/// Which standard deviation to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdKind {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

fn mean_std(xs: &[f64], kind: StdKind) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let denom = match kind {
        StdKind::Population => n,
        StdKind::Sample => (n - 1.0).max(1.0),
    };
    (mean, (ss / denom).sqrt())
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Mean and standard deviation of the residuals `pred - truth`, in l/h.
pub fn testing_error(pred: &[f64], truth: &[f64], kind: StdKind) -> Result<(f64, f64)> {
    check_lengths(pred, truth)?;
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let resid: Vec<f64> = pred.iter().zip(truth).map(|(p, t)| p - t).collect();
    Ok(mean_std(&resid, kind))
}

/// Per-interval trapezoid areas in liters (`f` in l/h, `t` in s).
fn trapezoids(f: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    check_lengths(f, t)?;
    if f.len() < 2 {
        return Err(Error::SeriesTooShort { len: f.len(), min: 2 });
    }
    t.windows(2)
        .zip(f.windows(2))
        .enumerate()
        .map(|(i, (tw, fw))| {
            let dt = tw[1] - tw[0];
            if !(dt > 0.0) {
                return Err(Error::NonMonotonicTime { index: i + 1 });
            }
            Ok(0.5 * (fw[0] + fw[1]) * dt / 3600.0)
        })
        .collect()
}

/// Fuel volume in liters by trapezoidal integration over explicit timestamps.
pub fn integral_fuel(f: &[f64], t: &[f64]) -> Result<f64> {
    Ok(trapezoids(f, t)?.iter().sum())
}

/// `100 · (∫pred − ∫truth) / ∫truth`.
pub fn integral_error(pred: &[f64], truth: &[f64], t: &[f64]) -> Result<f64> {
    let p = integral_fuel(pred, t)?;
    let q = integral_fuel(truth, t)?;
    if q == 0.0 {
        return Err(Error::ZeroTruthIntegral);
    }
    Ok(100.0 * (p - q) / q)
}

/// Per-tank integral errors.
#[derive(Debug, Clone, PartialEq)]
pub struct TankErrors {
    pub errors_pct: Vec<f64>,
    pub mean_pct: f64,
    pub std_pct: f64,
    /// Sample index at which each tank closes.
    pub boundaries: Vec<usize>,
}

/// Splits the record into consecutive "tanks" of `tank_l` liters of
/// ground-truth fuel and computes the integral error within each.
///
/// A tank closes at the first sample whose cumulative truth volume reaches
/// the next multiple of `tank_l`; the next tank starts at that same sample.
/// The trailing partial tank is discarded.
pub fn error_over_tank(pred: &[f64], truth: &[f64], t: &[f64], tank_l: f64, kind: StdKind) -> Result<TankErrors> {
    if !(tank_l > 0.0) {
        return Err(Error::InvalidParameter(format!("tank size {tank_l} must be positive")));
    }
    check_lengths(pred, truth)?;
    let dp = trapezoids(pred, t)?;
    let dq = trapezoids(truth, t)?;

    let mut errors = Vec::new();
    let mut boundaries = Vec::new();
    let (mut cum, mut tank_p, mut tank_q) = (0.0, 0.0, 0.0);
    let mut next = tank_l;
    for (i, (p, q)) in dp.iter().zip(&dq).enumerate() {
        cum += q;
        tank_p += p;
        tank_q += q;
        if cum >= next - TANK_TOL * next {
            errors.push(100.0 * (tank_p - tank_q) / tank_q);
            boundaries.push(i + 1);
            tank_p = 0.0;
            tank_q = 0.0;
            while next - TANK_TOL * next <= cum {
                next += tank_l;
            }
        }
    }
    if errors.is_empty() {
        return Err(Error::InsufficientFuel { total_l: cum, tank_l });
    }
    let (mean_pct, std_pct) = mean_std(&errors, kind);
    Ok(TankErrors {
        errors_pct: errors,
        mean_pct,
        std_pct,
        boundaries,
    })
}

/// The three comparison metrics for one estimator on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub err_mean: f64,
    pub err_std: f64,
    pub integral_error_pct: f64,
    pub eot_tank_size_l: f64,
    /// `None` when the record holds less than one tank.
    pub eot: Option<TankErrors>,
}

impl MetricReport {
    pub fn compute(pred: &[f64], truth: &[f64], t: &[f64], tank_l: f64, kind: StdKind) -> Result<Self> {
        let (err_mean, err_std) = testing_error(pred, truth, kind)?;
        let integral_error_pct = integral_error(pred, truth, t)?;
        let eot = match error_over_tank(pred, truth, t, tank_l, kind) {
            Ok(e) => Some(e),
            Err(Error::InsufficientFuel { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            err_mean,
            err_std,
            integral_error_pct,
            eot_tank_size_l: tank_l,
            eot,
        })
    }

    pub const CSV_HEADER: &'static str =
        "model,err_mean_lh,err_std_lh,integral_error_pct,eot_tank_l,eot_n_tanks,eot_mean_pct,eot_std_pct";

    /// One CSV row; EOT columns are left empty without a full tank.
    pub fn csv_row(&self, label: &str) -> String {
        let (n, mean, std) = match &self.eot {
            Some(e) => (
                e.errors_pct.len().to_string(),
                format!("{:.9}", e.mean_pct),
                format!("{:.9}", e.std_pct),
            ),
            None => Default::default(),
        };
        format!(
            "{label},{:.9},{:.9},{:.9},{},{n},{mean},{std}",
            self.err_mean, self.err_std, self.integral_error_pct, self.eot_tank_size_l
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "err_mean = {:.16e}", self.err_mean);
        let _ = writeln!(out, "err_std = {:.16e}", self.err_std);
        let _ = writeln!(out, "integral_error_pct = {:.16e}", self.integral_error_pct);
        let _ = writeln!(out, "eot_tank_size_l = {}", self.eot_tank_size_l);
        match &self.eot {
            Some(e) => {
                let list: Vec<String> = e.errors_pct.iter().map(|x| format!("{x:.16e}")).collect();
                let _ = writeln!(out, "eot_errors_pct = {}", list.join(", "));
                let _ = writeln!(out, "eot_mean_pct = {:.16e}", e.mean_pct);
                let _ = writeln!(out, "eot_std_pct = {:.16e}", e.std_pct);
            }
            None => {
                let _ = writeln!(out, "eot_errors_pct =");
                let _ = writeln!(out, "eot_mean_pct =");
                let _ = writeln!(out, "eot_std_pct =");
            }
        }
        out
    }
}
