//! Batch driver for the fuelsense toolkit.
//!
//! Exit codes: 0 on success, 2 for unreadable or invalid input, 3 when the
//! data are too few or too degenerate for the requested computation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuelsense::engine::{
    average_spectra, band_ratio, calibrate_threshold, extract_segments, segment_spectra, ClassifierSpec, Confusion,
    EngineState, SpectrumSummary,
};
use fuelsense::fitting::{
    fit_nn, fit_pb, fit_vt_micro, split, sweep_hidden, NnFitConfig, SplitMode, SplitSpec, DEFAULT_RESTARTS,
};
use fuelsense::io;
use fuelsense::metrics::{MetricReport, StdKind, DEFAULT_TANK_L};
use fuelsense::pipeline::{exclude_stopped, resample_and_sync, FilterSpec, DEFAULT_V_EPS_KMH};
use fuelsense::synth::{generate_trip, EngineTone, PerQuantity, Profile, TripSpec, DEFAULT_PLANTED_ALPHA};
use fuelsense::{Error, Execution, Model, ModelKind, PbParams, Quantity, SensorSeries};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fuelsense", version, about = "Fuel-flow estimation from speed and acceleration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter and synchronize raw velocity, acceleration and fuel-flow streams
    Preprocess(PreprocessArgs),
    /// Fit an estimator to a synchronized dataset
    Fit(FitArgs),
    /// Score one or more fitted models on a synchronized dataset
    Evaluate(EvaluateArgs),
    /// Classify engine state during stops from raw acceleration spectra
    Engine(EngineArgs),
    /// Generate a synthetic trip with known ground truth
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw stream CSV; give velocity, acceleration and fuel flow in any order
    #[arg(long = "input", required = true, num_args = 1)]
    pub inputs: Vec<PathBuf>,
    /// Synchronized dataset CSV to write
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 3.0)]
    pub cutoff_hz: f64,
    /// Speed at or below which a record counts as stopped in the summary (km/h)
    #[arg(long, default_value_t = DEFAULT_V_EPS_KMH)]
    pub v_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Vtmicro,
    Pb,
    Nn,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Vtmicro => ModelKind::VtMicro,
            KindArg::Pb => ModelKind::Pb,
            KindArg::Nn => ModelKind::Nn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Record,
    Trip,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Synchronized dataset CSV
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Model file to write
    #[arg(long)]
    pub output: PathBuf,
    /// Fit report to write (printed to stdout when omitted)
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = fuelsense::estimators::DEFAULT_HIDDEN)]
    pub hidden: usize,
    /// Comma-separated hidden sizes; the one with the lowest test MSE is kept
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.75)]
    pub train_fraction: f64,
    #[arg(long, value_enum, default_value_t = SplitArg::Record)]
    pub split: SplitArg,
    /// Records at or below this speed are dropped before fitting (km/h)
    #[arg(long, default_value_t = DEFAULT_V_EPS_KMH)]
    pub v_eps: f64,
    /// Run on a single thread
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StdArg {
    Population,
    Sample,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Synchronized dataset CSV
    #[arg(long)]
    pub input: PathBuf,
    /// Model file; repeat for several models
    #[arg(long = "model", required = true, num_args = 1)]
    pub models: Vec<PathBuf>,
    /// Metrics CSV to write (printed to stdout when omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TANK_L)]
    pub tank_l: f64,
    #[arg(long, default_value_t = DEFAULT_V_EPS_KMH)]
    pub v_eps: f64,
    /// Keep stopped records
    #[arg(long)]
    pub include_stopped: bool,
    #[arg(long, value_enum, default_value_t = StdArg::Population)]
    pub std: StdArg,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Velocity and raw acceleration stream CSVs, in any order
    #[arg(long = "input", required = true, num_args = 1)]
    pub inputs: Vec<PathBuf>,
    /// Engine-state labels CSV (start_s,end_s,label)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Per-segment decisions CSV (printed to stdout when omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Averaged spectra; writes `<stem>_on.<ext>` and `<stem>_off.<ext>`
    #[arg(long)]
    pub spectrum_out: Option<PathBuf>,
    #[arg(long, default_value_t = ClassifierSpec::default().threshold)]
    pub threshold: f64,
    #[arg(long, default_value_t = ClassifierSpec::default().target_hz)]
    pub target_hz: f64,
    #[arg(long, default_value_t = ClassifierSpec::default().band_halfwidth_hz)]
    pub halfwidth_hz: f64,
    /// Choose the threshold from the labels before classifying
    #[arg(long, requires = "labels")]
    pub calibrate: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory receiving v.csv, a.csv, f.csv, truth.csv and labels.csv
    #[arg(long)]
    pub output: PathBuf,
    /// urban_stop_go, highway_cruise, mixed_ramp or constant:<km/h>
    #[arg(long, default_value = "mixed_ramp", value_parser = parse_profile)]
    pub profile: Profile,
    #[arg(long, default_value_t = 1800.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Planted model file (defaults to the built-in power-balance model)
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Add Gaussian noise at the sensor resolutions
    #[arg(long)]
    pub noise: bool,
    /// Write unquantized values
    #[arg(long)]
    pub no_quantize: bool,
    /// Inject a 26.6 Hz engine tone into the acceleration during engine-on stops
    #[arg(long)]
    pub engine_tone: bool,
    #[arg(long, default_value_t = 0.8)]
    pub idle_flow: f64,
    #[arg(long, default_value_t = 0.7)]
    pub engine_on_prob: f64,
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse()
}

/// A failed command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_data_insufficiency() { EXIT_DATA } else { EXIT_INPUT },
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Engine(a) => cmd_engine(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => Ok(io::write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Reads raw streams and assigns each to its declared quantity.
fn read_streams(paths: &[PathBuf], wanted: &[Quantity]) -> CliResult<Vec<SensorSeries>> {
    let mut found: Vec<Option<SensorSeries>> = vec![None; wanted.len()];
    for p in paths {
        let s = io::read_series(p)?;
        let slot = wanted
            .iter()
            .position(|q| *q == s.quantity)
            .ok_or_else(|| CliError::input(format!("{}: unexpected quantity {}", p.display(), s.quantity)))?;
        if found[slot].is_some() {
            return Err(CliError::input(format!("{}: second {} stream", p.display(), s.quantity)));
        }
        found[slot] = Some(s);
    }
    found
        .into_iter()
        .zip(wanted)
        .map(|(s, q)| s.ok_or_else(|| CliError::input(format!("missing {q} stream"))))
        .collect()
}

pub fn cmd_preprocess(args: &PreprocessArgs) -> CliResult<()> {
    let streams = read_streams(
        &args.inputs,
        &[Quantity::Velocity, Quantity::Acceleration, Quantity::FuelFlow],
    )?;
    let ds = resample_and_sync(&streams[0], &streams[1], &streams[2], &FilterSpec::new(args.cutoff_hz))?;
    io::write_synced(&args.output, &ds)?;
    let stopped = ds.v.iter().filter(|v| **v <= args.v_eps).count();
    let zero_fuel = ds.f.iter().filter(|f| **f == 0.0).count();
    println!("records = {}", ds.len());
    if let (Some(t0), Some(t1)) = (ds.t.first(), ds.t.last()) {
        println!("span_s = {t0} .. {t1}");
    }
    println!("stopped_records = {stopped} (v <= {} km/h)", args.v_eps);
    println!("zero_fuel_records = {zero_fuel}");
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let ds = io::read_synced(&args.input)?;
    let moving = exclude_stopped(&ds, args.v_eps);
    let stopped = ds.len() - moving.len();
    let spec = SplitSpec {
        train_fraction: args.train_fraction,
        seed: args.seed,
        mode: match args.split {
            SplitArg::Record => SplitMode::Record,
            SplitArg::Trip => SplitMode::Trip,
        },
    };
    if moving.is_empty() {
        return Err(Error::InsufficientData {
            rule: format!("no records above {} km/h", args.v_eps),
        }
        .into());
    }
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let (train, test) = split(&moving, &spec)?;
    let mut sweep_table = String::new();
    let mut report = match ModelKind::from(args.kind) {
        ModelKind::Pb => {
            let mut r = fit_pb(&train)?;
            r.evaluate_test(&test)?;
            r
        }
        ModelKind::VtMicro => {
            let mut r = fit_vt_micro(&train)?;
            r.evaluate_test(&test)?;
            r
        }
        ModelKind::Nn => {
            let cfg = NnFitConfig {
                hidden: args.hidden,
                restarts: args.restarts,
                seed: args.seed,
                execution,
                ..NnFitConfig::default()
            };
            match &args.sweep {
                Some(sizes) => {
                    let (best, reports) = sweep_hidden(&moving, sizes, &spec, &cfg)?;
                    for (size, r) in sizes.iter().zip(&reports) {
                        let _ = writeln!(
                            sweep_table,
                            "sweep.hidden_{size}.test_mse = {:.16e}",
                            r.test_mse.unwrap_or(f64::NAN)
                        );
                    }
                    let _ = writeln!(sweep_table, "sweep.best_hidden = {best}");
                    let idx = sizes.iter().position(|s| *s == best).expect("best size is listed");
                    reports.into_iter().nth(idx).expect("one report per size")
                }
                None => fit_nn(&train, &test, &cfg)?,
            }
        }
    };
    report.n_excluded += stopped;
    report.model.save(&args.output)?;
    let mut text = report.to_text();
    text.push_str(&sweep_table);
    write_or_print(args.report.as_deref(), &text)
}

fn model_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let ds = io::read_synced(&args.input)?;
    let ds = if args.include_stopped {
        ds
    } else {
        exclude_stopped(&ds, args.v_eps)
    };
    if ds.is_empty() {
        return Err(Error::InsufficientData {
            rule: "no records left to evaluate".into(),
        }
        .into());
    }
    let kind = match args.std {
        StdArg::Population => StdKind::Population,
        StdArg::Sample => StdKind::Sample,
    };
    let mut out = format!("{}\n", MetricReport::CSV_HEADER);
    for path in &args.models {
        let model = Model::load(path)?;
        let pred = model.predict_dataset(&ds, Execution::default())?;
        let report = MetricReport::compute(&pred, &ds.f, &ds.t, args.tank_l, kind)?;
        if report.eot.is_none() {
            eprintln!(
                "warning: {}: less than one {} l tank of fuel; error-over-tank columns left empty",
                path.display(),
                args.tank_l
            );
        }
        out.push_str(&report.csv_row(&model_label(path)));
        out.push('\n');
    }
    write_or_print(args.output.as_deref(), &out)
}

fn spectrum_paths(base: &Path) -> (PathBuf, PathBuf) {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    (
        base.with_file_name(format!("{stem}_on.{ext}")),
        base.with_file_name(format!("{stem}_off.{ext}")),
    )
}

pub fn cmd_engine(args: &EngineArgs) -> CliResult<()> {
    let streams = read_streams(&args.inputs, &[Quantity::Velocity, Quantity::Acceleration])?;
    let labels = args.labels.as_deref().map(io::read_labels).transpose()?;
    let segments = extract_segments(&streams[0], &streams[1], labels.as_deref());
    let mut spec = ClassifierSpec {
        target_hz: args.target_hz,
        band_halfwidth_hz: args.halfwidth_hz,
        threshold: args.threshold,
        ..ClassifierSpec::default()
    };
    if args.calibrate {
        spec.threshold = calibrate_threshold(&segments, &spec)?;
        eprintln!("calibrated threshold = {}", spec.threshold);
    }
    spec.validate()?;

    let spectra = segment_spectra(&segments, Execution::default())?;
    let decisions: Vec<(f64, EngineState)> = spectra
        .iter()
        .map(|s| {
            let r = band_ratio(s, &spec);
            (r, if r > spec.threshold { EngineState::On } else { EngineState::Off })
        })
        .collect();

    let mut out = String::from("start_s,end_s,n_samples,ratio,decision,label\n");
    for (seg, (ratio, state)) in segments.iter().zip(&decisions) {
        let label = seg.label.map(|l| l.as_str()).unwrap_or("");
        let _ = writeln!(
            out,
            "{},{},{},{ratio:.6},{state},{label}",
            seg.start_time,
            seg.end_time(),
            seg.a_raw.len()
        );
    }
    if labels.is_some() {
        let pairs = segments
            .iter()
            .zip(&decisions)
            .filter_map(|(s, (_, d))| s.label.map(|l| (l, *d)));
        match Confusion::from_pairs(pairs).rates() {
            Ok((tpr, ppv)) => {
                let _ = writeln!(out, "# tpr={tpr:.6}");
                let _ = writeln!(out, "# ppv={ppv:.6}");
            }
            Err(e @ (Error::NoPositives | Error::NoPredictedPositives)) => eprintln!("warning: {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    write_or_print(args.output.as_deref(), &out)?;

    if let Some(base) = &args.spectrum_out {
        let (on_path, off_path) = spectrum_paths(base);
        for (state, path) in [(EngineState::On, on_path), (EngineState::Off, off_path)] {
            let group: Vec<SpectrumSummary> = segments
                .iter()
                .zip(&spectra)
                .zip(&decisions)
                .filter(|((seg, _), (_, d))| seg.label.unwrap_or(*d) == state)
                .map(|((_, s), _)| s.clone())
                .collect();
            if group.is_empty() {
                eprintln!("warning: no {state} segments; {} not written", path.display());
                continue;
            }
            io::write_spectrum(&path, &average_spectra(&group)?)?;
        }
    }
    eprintln!("segments = {}", segments.len());
    Ok(())
}

pub fn synth_spec(args: &SynthArgs) -> CliResult<TripSpec> {
    let planted_model = match &args.model {
        Some(p) => Model::load(p)?,
        None => Model::Pb(PbParams::new(DEFAULT_PLANTED_ALPHA)),
    };
    Ok(TripSpec {
        duration_s: args.duration,
        profile: args.profile,
        planted_model,
        noise_std: if args.noise {
            PerQuantity::RESOLUTION
        } else {
            PerQuantity::ZERO
        },
        quantization: if args.no_quantize {
            PerQuantity::ZERO
        } else {
            PerQuantity::RESOLUTION
        },
        seed: args.seed,
        idle_flow_lh: args.idle_flow,
        engine_tone: args.engine_tone.then(EngineTone::default),
        engine_on_prob: args.engine_on_prob,
        ..TripSpec::default()
    })
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let trip = generate_trip(&synth_spec(args)?)?;
    fs::create_dir_all(&args.output).map_err(|e| CliError::input(format!("{}: {e}", args.output.display())))?;
    let dir = &args.output;
    io::write_series(&dir.join("v.csv"), &trip.v_raw)?;
    io::write_series(&dir.join("a.csv"), &trip.a_raw)?;
    io::write_series(&dir.join("f.csv"), &trip.f_raw)?;
    io::write_synced(&dir.join("truth.csv"), &trip.truth)?;
    io::write_labels(&dir.join("labels.csv"), &trip.labels)?;
    let stopped = trip.truth.v.iter().filter(|v| **v == 0.0).count();
    println!("records = {}", trip.truth.len());
    println!("stops = {}", trip.labels.len());
    println!("stopped_records = {stopped}");
    Ok(())
}
