//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

#[path = "acceptance/oracle.rs"]
mod oracle;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fuelsense::engine::{evaluate_classifier, ClassifierSpec, EngineSegment, EngineState};
use fuelsense::estimators::monomials;
use fuelsense::fitting::{fit_nn, fit_pb, fit_vt_micro, split, standardization, NnFitConfig, NnObjective, SplitSpec};
use fuelsense::metrics::{error_over_tank, integral_error, integral_fuel, MetricReport, StdKind};
use fuelsense::pipeline::{exclude_stopped, resample_and_sync, zero_phase_lowpass, FilterSpec, DEFAULT_V_EPS_KMH};
use fuelsense::synth::{generate_trip, PerQuantity, Profile, TripSpec, DEFAULT_PLANTED_ALPHA};
use fuelsense::{Execution, Model, NnParams, Quantity, SensorSeries, SyncedDataset, VtMicroParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dataset(v: Vec<f64>, a: Vec<f64>, f: Vec<f64>) -> SyncedDataset {
    let t = (0..v.len()).map(|i| i as f64 * 0.1).collect();
    SyncedDataset::new(t, v, a, f).expect("valid dataset")
}

fn max_rel(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / w.abs())
        .fold(0.0, f64::max)
}

fn pb_alpha(m: &Model) -> [f64; 4] {
    match m {
        Model::Pb(p) => p.alpha,
        other => panic!("expected a PB model, got {}", other.kind()),
    }
}

fn pb_recovery(spec: &TripSpec) -> f64 {
    let trip = generate_trip(spec).expect("trip");
    let ds = resample_and_sync(&trip.v_raw, &trip.a_raw, &trip.f_raw, &FilterSpec::default()).expect("sync");
    let ds = exclude_stopped(&ds, DEFAULT_V_EPS_KMH);
    max_rel(&pb_alpha(&fit_pb(&ds).expect("fit").model), &DEFAULT_PLANTED_ALPHA)
}

fn pb_round_trip() -> Outcome {
    let base = TripSpec {
        duration_s: 1800.0,
        profile: Profile::MixedRamp,
        seed: 1,
        ..TripSpec::default()
    };
    let clean = pb_recovery(&base.clone().noiseless());
    let noisy = pb_recovery(&TripSpec {
        noise_std: PerQuantity::RESOLUTION,
        quantization: PerQuantity::RESOLUTION,
        ..base.clone()
    });
    let trip = generate_trip(&base.noiseless()).expect("trip");
    let direct = max_rel(
        &pb_alpha(&fit_pb(&exclude_stopped(&trip.truth, DEFAULT_V_EPS_KMH)).expect("fit").model),
        &DEFAULT_PLANTED_ALPHA,
    );
    outcome(
        clean <= 1e-6 && noisy <= 1e-2,
        format!(
            "noiseless rel err {clean:.3e} (bound 1e-6), noisy rel err {noisy:.3e} (bound 1e-2); \
             unfiltered truth gives {direct:.3e}"
        ),
    )
}

fn planted_vt_micro() -> VtMicroParams {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut coef = || {
        let mut c = [[0.0; 4]; 4];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                *x = sign * rng.random_range(0.1..0.5) / (100f64.powi(i as i32) * 3f64.powi(j as i32));
            }
        }
        c
    };
    VtMicroParams { l: coef(), m: coef() }
}

fn vt_log_flow(c: &[[f64; 4]; 4], v: f64, a: f64) -> f64 {
    let mut s = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            s += x * v.powi(i as i32) * a.powi(j as i32);
        }
    }
    s
}

fn vt_micro_round_trip() -> Outcome {
    let planted = planted_vt_micro();
    let (mut v, mut a, mut f) = (vec![], vec![], vec![]);
    for vi in 0..=20 {
        for ai in -12..=12 {
            let (vv, aa) = (vi as f64 * 5.0, ai as f64 * 0.25);
            let c = if aa >= 0.0 { &planted.l } else { &planted.m };
            v.push(vv);
            a.push(aa);
            f.push(vt_log_flow(c, vv, aa).exp());
        }
    }
    let fit = match fit_vt_micro(&dataset(v.clone(), a.clone(), f)).expect("fit").model {
        Model::VtMicro(p) => p,
        other => panic!("expected VT-MICRO, got {}", other.kind()),
    };
    let flat = |c: &[[f64; 4]; 4]| c.iter().flatten().copied().collect::<Vec<_>>();
    let err_l = max_rel(&flat(&fit.l), &flat(&planted.l));
    let err_m = max_rel(&flat(&fit.m), &flat(&planted.m));

    let mut boundary = 0.0_f64;
    let mut separation = f64::INFINITY;
    for vv in v.iter().step_by(25) {
        let want_l = vt_log_flow(&planted.l, *vv, 0.0).exp();
        let want_m = vt_log_flow(&planted.m, *vv, 0.0).exp();
        let got = Model::VtMicro(fit.clone()).predict(*vv, 0.0).expect("finite");
        boundary = boundary.max((got - want_l).abs() / want_l);
        separation = separation.min((got - want_m).abs() / want_m);
    }
    outcome(
        err_l <= 1e-6 && err_m <= 1e-6 && boundary <= 1e-6 && separation > 1e-3,
        format!(
            "L rel err {err_l:.3e}, M rel err {err_m:.3e}; at a = 0 prediction matches L within {boundary:.1e} \
             and differs from M by at least {separation:.1e}"
        ),
    )
}

fn close_with_floor(got: &[f64], want: &[f64]) -> f64 {
    let norm = want.iter().map(|x| x.abs()).fold(0.0, f64::max);
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / w.abs().max(1e-3 * norm))
        .fold(0.0, f64::max)
}

fn ls_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_pb = 0.0_f64;
    let mut worst_vt = 0.0_f64;
    let cases = 20;
    for _ in 0..cases {
        let n = rng.random_range(10..=50);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(5.0..120.0)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..2.0)).collect();
        let f: Vec<f64> = v
            .iter()
            .map(|v| 0.3 + 0.04 * v + 1e-5 * v * v * v / 10.0 + rng.random_range(0.0..0.4))
            .collect();
        let rows: Vec<Vec<f64>> = v.iter().zip(&a).map(|(v, a)| vec![a * v, *v, v * v, v * v * v]).collect();
        let want = oracle::normal_equations(&rows, &f);
        let got = pb_alpha(&fit_pb(&dataset(v, a, f)).expect("fit").model);
        worst_pb = worst_pb.max(close_with_floor(&got, &want));

        let per_branch = rng.random_range(20..=25);
        let (mut v, mut a, mut f) = (vec![], vec![], vec![]);
        for sign in [1.0, -1.0] {
            for _ in 0..per_branch {
                let vi: f64 = rng.random_range(1.0..35.0);
                let ai: f64 = sign * rng.random_range(0.05..3.0);
                v.push(vi);
                a.push(ai);
                f.push((0.2 + 0.02 * vi - 0.1 * ai + rng.random_range(-0.05..0.05)).exp());
            }
        }
        let fit = match fit_vt_micro(&dataset(v.clone(), a.clone(), f.clone())).expect("fit").model {
            Model::VtMicro(p) => p,
            other => panic!("expected VT-MICRO, got {}", other.kind()),
        };
        for (positive, coef) in [(true, &fit.l), (false, &fit.m)] {
            let idx: Vec<usize> = (0..v.len()).filter(|&i| (a[i] >= 0.0) == positive).collect();
            let rows: Vec<Vec<f64>> = idx.iter().map(|&i| monomials(v[i], a[i]).to_vec()).collect();
            let y: Vec<f64> = idx.iter().map(|&i| f[i].ln()).collect();
            let want = oracle::normal_equations(&rows, &y);
            let got: Vec<f64> = coef.iter().flatten().copied().collect();
            worst_vt = worst_vt.max(close_with_floor(&got, &want));
        }
    }
    outcome(
        worst_pb <= 1e-8 && worst_vt <= 1e-8,
        format!("{cases} PB and {cases} VT-MICRO instances; worst deviation PB {worst_pb:.2e}, VT-MICRO {worst_vt:.2e}"),
    )
}

fn planted_network_data(n: usize, seed: u64) -> SyncedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (v, a): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|_| (rng.random_range(0.5..130.0), rng.random_range(-3.0..3.0)))
        .unzip();
    let (mean, std) = standardization(&dataset(v.clone(), a.clone(), vec![0.0; n]));
    let w2: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
    let net = NnParams {
        input_mean: mean,
        input_std: std,
        w1: (0..9)
            .map(|_| [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)])
            .collect(),
        b1: (0..9).map(|_| rng.random_range(-0.5..0.5)).collect(),
        b2: w2.iter().map(|w| w.abs()).sum::<f64>() + 0.2,
        w2,
    };
    let f = v.iter().zip(&a).map(|(v, a)| net.raw(*v, *a)).collect();
    dataset(v, a, f)
}

fn nn_checks() -> Outcome {
    let ds = planted_network_data(400, 41);
    let (mean, std) = standardization(&ds);
    let obj = NnObjective::new(&ds, mean, std, 9, Execution::default());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let step = 1e-6;
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let theta: Vec<f64> = (0..obj.n_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut g = vec![0.0; theta.len()];
        obj.loss_grad(&theta, &mut g);
        for k in 0..theta.len() {
            let (mut tp, mut tm) = (theta.clone(), theta.clone());
            tp[k] += step;
            tm[k] -= step;
            let fd = (obj.loss(&tp) - obj.loss(&tm)) / (2.0 * step);
            worst = worst.max((g[k] - fd).abs() / g[k].abs().max(fd.abs()).max(1e-3));
        }
    }

    let ds = planted_network_data(2000, 43);
    let (train, test) = split(&ds, &SplitSpec::new(0.75, 44)).expect("split");
    let rep = fit_nn(
        &train,
        &test,
        &NnFitConfig {
            hidden: 9,
            restarts: 5,
            seed: 45,
            ..NnFitConfig::default()
        },
    )
    .expect("fit");
    let mse = rep.test_mse.expect("test set");
    outcome(
        worst < 1e-5 && mse <= 1e-4,
        format!("max gradient rel err {worst:.2e} (bound 1e-5); planted 2-9-1 test MSE {mse:.2e} after 5 restarts"),
    )
}

fn tone_amplitude(y: &[f64], rate: f64, freq: f64) -> f64 {
    let (mut ss, mut cc, mut sc, mut s, mut c) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, yi) in y.iter().enumerate() {
        let w = 2.0 * PI * freq * i as f64 / rate;
        ss += w.sin() * w.sin();
        cc += w.cos() * w.cos();
        sc += w.sin() * w.cos();
        s += yi * w.sin();
        c += yi * w.cos();
    }
    let det = ss * cc - sc * sc;
    ((s * cc - c * sc) / det).hypot((c * ss - s * sc) / det)
}

fn filter_properties() -> Outcome {
    let spec = FilterSpec::default();
    let filt = |rate: f64, x: Vec<f64>| {
        zero_phase_lowpass(&SensorSeries::new(Quantity::Acceleration, 0.0, rate, x).expect("series"), &spec)
            .expect("filter")
            .values
    };
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut dc = 0.0_f64;
    let mut lin = 0.0_f64;
    let mut amp_err = 0.0_f64;
    let mut lags = Vec::new();
    for rate in [10.0, 20.0, 100.0] {
        let c = rng.random_range(-50.0..50.0);
        dc = dc.max(filt(rate, vec![c; 500]).iter().map(|y| (y - c).abs()).fold(0.0, f64::max));

        let x: Vec<f64> = (0..600).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..600).map(|_| rng.random_range(-10.0..10.0)).collect();
        let (p, q) = (1.7, -0.6);
        let mix = x.iter().zip(&y).map(|(a, b)| p * a + q * b).collect();
        let (fx, fy, fm) = (filt(rate, x), filt(rate, y), filt(rate, mix));
        for i in 0..fm.len() {
            lin = lin.max((fm[i] - (p * fx[i] + q * fy[i])).abs());
        }

        let n = (rate * 400.0) as usize;
        let sine: Vec<f64> = (0..n).map(|i| (2.0 * PI * 3.0 * i as f64 / rate).sin()).collect();
        let out = filt(rate, sine);
        let amp = tone_amplitude(&out[n / 4..3 * n / 4], rate, 3.0);
        amp_err = amp_err.max((amp - 0.25).abs() / 0.25);

        let m = (rate * 60.0) as usize;
        let x: Vec<f64> = (0..m)
            .map(|i| {
                let t = i as f64 / rate;
                (2.0 * PI * 0.3 * t).sin() + 0.5 * (2.0 * PI * 0.7 * t + 1.0).sin()
            })
            .collect();
        let y = filt(rate, x.clone());
        let xcorr = |lag: i64| -> f64 {
            (m / 4..3 * m / 4)
                .map(|i| x[i] * y[(i as i64 + lag) as usize])
                .sum()
        };
        lags.push((-10..=10).max_by(|a, b| xcorr(*a).total_cmp(&xcorr(*b))).expect("lags"));
    }
    outcome(
        dc <= 1e-9 && lin <= 1e-9 && amp_err <= 0.02 && lags.iter().all(|l| *l == 0),
        format!(
            "DC deviation {dc:.1e}, linearity {lin:.1e}, cutoff gain rel err {:.2}%, cross-correlation peak lags {lags:?}",
            amp_err * 100.0
        ),
    )
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let n = 20_000;
    let t: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..30.0)).collect();
    let scale = 104.4 / integral_fuel(&raw, &t).expect("integral");
    let truth: Vec<f64> = raw.iter().map(|f| f * scale).collect();
    let total = integral_fuel(&truth, &t).expect("integral");

    let scaled: Vec<f64> = truth.iter().map(|f| 1.1 * f).collect();
    let ie = integral_error(&scaled, &truth, &t).expect("integral error");

    let perfect = MetricReport::compute(&truth, &truth, &t, 10.4, StdKind::Population).expect("metrics");
    let eot = perfect.eot.as_ref().expect("ten tanks");
    let all_zero = perfect.err_mean == 0.0
        && perfect.err_std == 0.0
        && perfect.integral_error_pct == 0.0
        && eot.mean_pct == 0.0
        && eot.std_pct == 0.0
        && eot.errors_pct.iter().all(|e| *e == 0.0);

    let tanks = error_over_tank(&scaled, &truth, &t, 10.4, StdKind::Population)
        .expect("tanks")
        .errors_pct
        .len();
    outcome(
        (ie - 10.0).abs() <= 1e-12 && all_zero && tanks == 10,
        format!(
            "1.1x prediction gives {ie:.15} %; perfect prediction all zero: {all_zero}; \
             {total:.12} l in 10.4 l tanks gives {tanks} tanks"
        ),
    )
}

fn engine_fixture(on: bool, rng: &mut ChaCha8Rng) -> EngineSegment {
    let sigma = 0.02;
    let noise = Normal::new(0.0, sigma).expect("normal");
    let phase = rng.random_range(0.0..2.0 * PI);
    let n = rng.random_range(300..1500);
    let a_raw = (0..n)
        .map(|i| {
            let t = i as f64 / 100.0;
            let tone = if on { 3.0 * sigma * (2.0 * PI * 26.6 * t + phase).sin() } else { 0.0 };
            0.2 + tone + noise.sample(rng)
        })
        .collect();
    EngineSegment {
        a_raw,
        rate_hz: 100.0,
        start_time: 0.0,
        label: Some(if on { EngineState::On } else { EngineState::Off }),
    }
}

fn engine_classifier() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let segs: Vec<EngineSegment> = (0..100).map(|i| engine_fixture(i < 50, &mut rng)).collect();
    let (tpr, ppv) = evaluate_classifier(&segs, &ClassifierSpec::default()).expect("rates");
    outcome(
        tpr >= 0.9 && ppv >= 0.9,
        format!("50 on / 50 off at tone/noise 3: TPR {tpr:.2}, PPV {ppv:.2}"),
    )
}

fn fuelsense(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_fuelsense"))
        .args(args)
        .output()
        .expect("run fuelsense");
    assert!(
        out.status.success(),
        "fuelsense {args:?} exited with {}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn closed_loop() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    fuelsense(&[
        "synth", "--output", p(d), "--profile", "mixed_ramp", "--duration", "3600", "--seed", "81", "--no-quantize",
    ]);
    let synced = d.join("synced.csv");
    let (v, a, f) = (d.join("v.csv"), d.join("a.csv"), d.join("f.csv"));
    fuelsense(&["preprocess", "--input", p(&v), "--input", p(&a), "--input", p(&f), "--output", p(&synced)]);
    let model = d.join("pb.model");
    fuelsense(&["fit", "--input", p(&synced), "--kind", "pb", "--output", p(&model), "--seed", "82"]);
    let csv = fuelsense(&["evaluate", "--input", p(&synced), "--model", p(&model), "--tank-l", "0.25"]);

    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let row: Vec<&str> = lines.next().expect("row").split(',').collect();
    let col = |name: &str| -> f64 {
        let i = header.iter().position(|h| *h == name).expect("column");
        row[i].parse().unwrap_or(f64::NAN)
    };
    let (mean, ie, tanks, eot_std) = (
        col("err_mean_lh"),
        col("integral_error_pct"),
        col("eot_n_tanks"),
        col("eot_std_pct"),
    );
    outcome(
        mean.abs() < 1e-3 && ie.abs() < 0.1 && tanks >= 2.0 && eot_std < 0.1,
        format!("err mean {mean:.2e} l/h, integral error {ie:.2e} %, EOT std {eot_std:.2e} % over {tanks} tanks of 0.25 l"),
    )
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().expect("temp dir");
    let mut files: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for run in 0..2 {
        let d = root.path().join(format!("run{run}"));
        fuelsense(&[
            "synth", "--output", p(&d), "--profile", "urban_stop_go", "--duration", "600", "--seed", "91", "--noise",
        ]);
        let synced = d.join("synced.csv");
        let streams = [d.join("v.csv"), d.join("a.csv"), d.join("f.csv")];
        fuelsense(&[
            "preprocess", "--input", p(&streams[0]), "--input", p(&streams[1]), "--input", p(&streams[2]), "--output",
            p(&synced),
        ]);
        for kind in ["pb", "vtmicro", "nn"] {
            fuelsense(&[
                "fit", "--input", p(&synced), "--kind", kind, "--seed", "92", "--restarts", "3",
                "--output", p(&d.join(format!("{kind}.model"))),
                "--report", p(&d.join(format!("{kind}.report"))),
            ]);
        }
        let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(&d)
            .expect("list")
            .map(|e| {
                let e = e.expect("entry");
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).expect("read"))
            })
            .collect();
        entries.sort();
        files.push(entries);
    }
    let names: Vec<&str> = files[0].iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = files[0]
        .iter()
        .zip(&files[1])
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.as_str())
        .collect();
    outcome(
        files[0].len() == files[1].len() && differing.is_empty(),
        format!("{} files compared ({}); differing: {differing:?}", names.len(), names.join(" ")),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "PB round trip",
            limit: Some(Duration::from_secs(10)),
            run: pb_round_trip,
        },
        Criterion {
            id: 2,
            name: "VT-MICRO round trip",
            limit: None,
            run: vt_micro_round_trip,
        },
        Criterion {
            id: 3,
            name: "least-squares oracle",
            limit: None,
            run: ls_oracle,
        },
        Criterion {
            id: 4,
            name: "network gradient and recovery",
            limit: Some(Duration::from_secs(60)),
            run: nn_checks,
        },
        Criterion {
            id: 5,
            name: "filter properties",
            limit: None,
            run: filter_properties,
        },
        Criterion {
            id: 6,
            name: "metric identities",
            limit: None,
            run: metric_identities,
        },
        Criterion {
            id: 7,
            name: "engine classifier",
            limit: Some(Duration::from_secs(10)),
            run: engine_classifier,
        },
        Criterion {
            id: 8,
            name: "closed loop through the CLI",
            limit: Some(Duration::from_secs(30)),
            run: closed_loop,
        },
        Criterion {
            id: 9,
            name: "determinism",
            limit: None,
            run: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let out = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed <= l);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit = c.limit.map(|l| format!(", limit {} s", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {} {}: {}: {} [{:.2} s{limit}]",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
