use fuelsense::pipeline::{exclude_stopped, resample_and_sync, zero_phase_lowpass, FilterSpec, NaturalSpline};
use fuelsense::synth::{generate_trip, Profile, TripSpec};
use fuelsense::{Quantity, SensorSeries, SyncedDataset};
use proptest::prelude::*;

fn series(rate: f64, values: Vec<f64>) -> SensorSeries {
    SensorSeries::new(Quantity::Acceleration, 0.0, rate, values).unwrap()
}

fn signal() -> impl Strategy<Value = Vec<f64>> {
    (20usize..400).prop_flat_map(|n| prop::collection::vec(-50.0..50.0f64, n))
}

fn rates() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![10.0, 20.0, 100.0])
}

proptest! {
    #[test]
    fn filter_is_linear(x in signal(), seed in any::<u64>(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64, rate in rates()) {
        let n = x.len();
        let y: Vec<f64> = (0..n).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64 / 10.0 - 50.0).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let spec = FilterSpec::default();
        let fx = zero_phase_lowpass(&series(rate, x), &spec).unwrap().values;
        let fy = zero_phase_lowpass(&series(rate, y), &spec).unwrap().values;
        let fm = zero_phase_lowpass(&series(rate, mix), &spec).unwrap().values;
        for i in 0..n {
            prop_assert!((fm[i] - (alpha * fx[i] + beta * fy[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn filter_commutes_with_reversal(x in signal(), rate in rates()) {
        let spec = FilterSpec::default();
        let mut rev = x.clone();
        rev.reverse();
        let a = zero_phase_lowpass(&series(rate, x), &spec).unwrap().values;
        let mut b = zero_phase_lowpass(&series(rate, rev), &spec).unwrap().values;
        b.reverse();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn filter_keeps_constants(c in -1e3..1e3f64, n in 10usize..500, rate in rates()) {
        let out = zero_phase_lowpass(&series(rate, vec![c; n]), &FilterSpec::default()).unwrap();
        prop_assert_eq!(out.len(), n);
        for y in out.values {
            prop_assert!((y - c).abs() < 1e-9 * c.abs().max(1.0));
        }
    }

    #[test]
    fn spline_interpolates_knots(y in prop::collection::vec(-100.0..100.0f64, 2..60), step in 0.01..2.0f64) {
        let x: Vec<f64> = (0..y.len()).map(|i| 3.0 + i as f64 * step).collect();
        let s = NaturalSpline::new(&x, &y).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            prop_assert!((s.eval(*xi) - yi).abs() <= 1e-12 * yi.abs().max(1.0));
        }
    }

    #[test]
    fn exclude_stopped_is_idempotent(v in prop::collection::vec(prop_oneof![Just(0.0), 0.0..0.1f64, 0.0..120.0f64], 0..200), eps in 0.0..0.2f64) {
        let n = v.len();
        let ds = SyncedDataset {
            t: (0..n).map(|i| i as f64 * 0.1).collect(),
            a: vec![0.0; n],
            f: vec![1.0; n],
            v,
        };
        let once = exclude_stopped(&ds, eps);
        prop_assert_eq!(exclude_stopped(&once, eps), once.clone());
        prop_assert!(once.v.iter().all(|v| *v > eps));
        prop_assert_eq!(once.len(), ds.v.iter().filter(|v| **v > eps).count());
    }
}

#[test]
fn synced_trip_tracks_truth() {
    let trip = generate_trip(
        &TripSpec {
            duration_s: 300.0,
            profile: Profile::HighwayCruise,
            ..TripSpec::default()
        }
        .noiseless(),
    )
    .unwrap();
    let ds = resample_and_sync(&trip.v_raw, &trip.a_raw, &trip.f_raw, &FilterSpec::default()).unwrap();
    assert_eq!(ds.t, trip.truth.t);
    assert!(ds.is_uniform(0.1, 1e-9));
    // The zero-phase response is about 1 - 2(ω/ωc)² at low frequency, so the
    // filtered signal sits within roughly 2·|x''|/ωc² of the truth.
    let wc = 2.0 * std::f64::consts::PI * 3.0;
    let bound = |x: &[f64]| {
        let curv = x.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs() / 0.01).fold(0.0, f64::max);
        3.0 * 2.0 * curv / (wc * wc) + 1e-9
    };
    let worst = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let t = &trip.truth;
    for (name, got, want) in [("v", &ds.v, &t.v), ("a", &ds.a, &t.a), ("f", &ds.f, &t.f)] {
        let (err, tol) = (worst(got, want), bound(want));
        assert!(err <= tol, "{name}: error {err} exceeds {tol}");
    }
}

#[test]
fn overlap_trims_to_common_span() {
    let mk = |q, start, rate: f64, secs: f64| {
        let n = (secs * rate) as usize;
        SensorSeries::new(q, start, rate, (0..n).map(|i| 1.0 + i as f64 / rate * 0.01).collect()).unwrap()
    };
    let v = mk(Quantity::Velocity, 0.0, 10.0, 60.0);
    let a = mk(Quantity::Acceleration, 5.0, 100.0, 30.0);
    let f = mk(Quantity::FuelFlow, 2.0, 20.0, 50.0);
    let ds = resample_and_sync(&v, &a, &f, &FilterSpec::default()).unwrap();
    assert!((ds.t[0] - 5.0).abs() < 1e-9);
    assert!(*ds.t.last().unwrap() <= a.end_time() + 1e-9);
    assert_eq!(ds.len(), 300);
}
