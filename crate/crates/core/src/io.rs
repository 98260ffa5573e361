//! CSV formats for raw streams, synchronized datasets, engine labels and
//! spectra. Parse errors carry the file name and 1-based line number.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::engine::{LabelInterval, SpectrumSummary};
use crate::error::{Error, Result};
use crate::pipeline::{Quantity, SensorSeries, SyncedDataset};

pub const SERIES_HEADER: &str = "t_s,value";
pub const SYNCED_HEADER: &str = "t_s,v_kmh,a_ms2,f_lh";
pub const LABELS_HEADER: &str = "start_s,end_s,label";
pub const SPECTRUM_HEADER: &str = "freq_hz,amplitude";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn expect_header<'a>(
    it: &mut impl Iterator<Item = (usize, &'a str)>,
    header: &str,
    path: &Path,
) -> Result<()> {
    match it.next() {
        Some((_, l)) if l == header => Ok(()),
        Some((n, l)) => Err(Error::parse(path, n, format!("expected header `{header}`, found `{l}`"))),
        None => Err(Error::parse(path, 1, format!("missing header `{header}`"))),
    }
}

fn fields<const N: usize>(line: &str, n: usize, path: &Path) -> Result<[f64; N]> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(Error::parse(path, n, format!("expected {N} fields, found {}", parts.len())));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::parse(path, n, format!("invalid number `{p}`")))?;
    }
    Ok(out)
}

/// Parses a raw stream. The first line must declare
/// `# rate_hz=<float> quantity=<velocity|acceleration|fuel_flow>`; sample
/// timestamps must match the declared rate.
pub fn parse_series(text: &str, path: &Path) -> Result<SensorSeries> {
    let mut it = lines(text);
    let (n, meta) = it
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let meta = meta
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(path, n, "expected `# rate_hz=<float> quantity=<name>`"))?;
    let (mut rate, mut quantity) = (None, None);
    for kv in meta.split_whitespace() {
        match kv.split_once('=') {
            Some(("rate_hz", r)) => {
                rate = Some(r.parse::<f64>().map_err(|_| Error::parse(path, n, format!("invalid rate `{r}`")))?)
            }
            Some(("quantity", q)) => quantity = Some(q.parse::<Quantity>().map_err(|e| Error::parse(path, n, e))?),
            _ => return Err(Error::parse(path, n, format!("unexpected field `{kv}`"))),
        }
    }
    let rate = rate.ok_or_else(|| Error::parse(path, n, "missing rate_hz"))?;
    let quantity = quantity.ok_or_else(|| Error::parse(path, n, "missing quantity"))?;
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::parse(path, n, format!("rate must be positive, got {rate}")));
    }
    expect_header(&mut it, SERIES_HEADER, path)?;

    let mut start = None;
    let mut values = Vec::new();
    for (n, line) in it {
        let [t, x] = fields::<2>(line, n, path)?;
        let t0 = *start.get_or_insert(t);
        let expected = t0 + values.len() as f64 / rate;
        if (t - expected).abs() > 1e-6 * (1.0 + expected.abs()) {
            return Err(Error::parse(
                path,
                n,
                format!("timestamp {t} does not match declared rate {rate} Hz (expected {expected})"),
            ));
        }
        values.push(x);
    }
    let start = start.ok_or_else(|| Error::parse(path, n, "no samples"))?;
    SensorSeries::new(quantity, start, rate, values)
}

pub fn read_series(path: &Path) -> Result<SensorSeries> {
    parse_series(&read_text(path)?, path)
}

pub fn format_series(s: &SensorSeries) -> String {
    let mut out = format!("# rate_hz={} quantity={}\n{SERIES_HEADER}\n", s.rate_hz, s.quantity);
    for (i, x) in s.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", s.time_at(i), x);
    }
    out
}

pub fn write_series(path: &Path, s: &SensorSeries) -> Result<()> {
    write_text(path, &format_series(s))
}

pub fn parse_synced(text: &str, path: &Path) -> Result<SyncedDataset> {
    let mut it = lines(text).filter(|(_, l)| !l.starts_with('#'));
    expect_header(&mut it, SYNCED_HEADER, path)?;
    let mut ds = SyncedDataset::default();
    for (n, line) in it {
        let [t, v, a, f] = fields::<4>(line, n, path)?;
        if ds.t.last().is_some_and(|&prev| t <= prev) {
            return Err(Error::parse(path, n, "timestamps must be strictly increasing"));
        }
        if v < 0.0 || f < 0.0 {
            return Err(Error::parse(path, n, "speed and fuel flow must be non-negative"));
        }
        ds.t.push(t);
        ds.v.push(v);
        ds.a.push(a);
        ds.f.push(f);
    }
    Ok(ds)
}

pub fn read_synced(path: &Path) -> Result<SyncedDataset> {
    parse_synced(&read_text(path)?, path)
}

pub fn format_synced(ds: &SyncedDataset) -> String {
    let mut out = format!("{SYNCED_HEADER}\n");
    for i in 0..ds.len() {
        let _ = writeln!(out, "{},{},{},{}", ds.t[i], ds.v[i], ds.a[i], ds.f[i]);
    }
    out
}

pub fn write_synced(path: &Path, ds: &SyncedDataset) -> Result<()> {
    write_text(path, &format_synced(ds))
}

pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<LabelInterval>> {
    let mut it = lines(text).filter(|(_, l)| !l.starts_with('#'));
    expect_header(&mut it, LABELS_HEADER, path)?;
    it.map(|(n, line)| {
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let [s, e, l] = parts[..] else {
            return Err(Error::parse(path, n, format!("expected 3 fields, found {}", parts.len())));
        };
        let num = |x: &str| {
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, n, format!("invalid number `{x}`")))
        };
        let (start_s, end_s) = (num(s)?, num(e)?);
        if end_s <= start_s {
            return Err(Error::parse(path, n, "interval end must follow its start"));
        }
        Ok(LabelInterval {
            start_s,
            end_s,
            state: l.parse().map_err(|e| Error::parse(path, n, e))?,
        })
    })
    .collect()
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelInterval>> {
    parse_labels(&read_text(path)?, path)
}

pub fn format_labels(labels: &[LabelInterval]) -> String {
    let mut out = format!("{LABELS_HEADER}\n");
    for l in labels {
        let _ = writeln!(out, "{},{},{}", l.start_s, l.end_s, l.state);
    }
    out
}

pub fn write_labels(path: &Path, labels: &[LabelInterval]) -> Result<()> {
    write_text(path, &format_labels(labels))
}

pub fn format_spectrum(s: &SpectrumSummary) -> String {
    let mut out = format!("# n_segments={}\n{SPECTRUM_HEADER}\n", s.n_segments_averaged);
    for (f, a) in s.freqs.iter().zip(&s.amplitude) {
        let _ = writeln!(out, "{f},{a}");
    }
    out
}

pub fn write_spectrum(path: &Path, s: &SpectrumSummary) -> Result<()> {
    write_text(path, &format_spectrum(s))
}
