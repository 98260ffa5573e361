use super::{zero_phase_lowpass, FilterSpec, NaturalSpline, Quantity, SensorSeries, SyncedDataset};
use crate::error::{Error, Result};

/// Half of the 0.01 km/h GNSS speed resolution.
pub const DEFAULT_V_EPS_KMH: f64 = 0.05;

const TIME_TOL: f64 = 1e-9;

fn expect_quantity(series: &SensorSeries, quantity: Quantity) -> Result<()> {
    if series.quantity != quantity {
        return Err(Error::InvalidParameter(format!(
            "expected a {quantity} stream, got {}",
            series.quantity
        )));
    }
    Ok(())
}

/// Filters the three raw streams and brings acceleration and fuel flow onto
/// the velocity sampling instants with natural cubic splines.
///
/// Output timestamps are exactly the velocity timestamps inside the common
/// time span. Interpolated fuel flow and filtered velocity are clamped at
/// zero.
pub fn resample_and_sync(
    v_raw: &SensorSeries,
    a_raw: &SensorSeries,
    f_raw: &SensorSeries,
    spec: &FilterSpec,
) -> Result<SyncedDataset> {
    expect_quantity(v_raw, Quantity::Velocity)?;
    expect_quantity(a_raw, Quantity::Acceleration)?;
    expect_quantity(f_raw, Quantity::FuelFlow)?;

    let v = zero_phase_lowpass(v_raw, spec)?;
    let a = zero_phase_lowpass(a_raw, spec)?;
    let f = zero_phase_lowpass(f_raw, spec)?;

    let lo = v.start_time.max(a.start_time).max(f.start_time);
    let hi = v.end_time().min(a.end_time()).min(f.end_time());
    if !(hi >= lo) {
        return Err(Error::NoOverlap);
    }
    let idx: Vec<usize> = (0..v.len())
        .filter(|&i| {
            let t = v.time_at(i);
            t >= lo - TIME_TOL && t <= hi + TIME_TOL
        })
        .collect();
    if idx.is_empty() {
        return Err(Error::NoOverlap);
    }

    let a_spline = NaturalSpline::new(&a.timestamps(), &a.values)?;
    let f_spline = NaturalSpline::new(&f.timestamps(), &f.values)?;

    let n = idx.len();
    let mut ds = SyncedDataset {
        t: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
    };
    for i in idx {
        let t = v.time_at(i);
        ds.t.push(t);
        ds.v.push(v.values[i].max(0.0));
        ds.a.push(a_spline.eval(t));
        ds.f.push(f_spline.eval(t).max(0.0));
    }
    Ok(ds)
}

/// Drops records with `v <= v_eps`, keeping order and original timestamps.
pub fn exclude_stopped(ds: &SyncedDataset, v_eps: f64) -> SyncedDataset {
    ds.filter(|v, _, _| v > v_eps)
}
