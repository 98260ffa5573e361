//! Text persistence for fitted models.
//!
//! ```text
//! model_kind: pb
//! version: 1
//! alpha_1 = 1.2000000000000000e-1
//! ...
//! ```
//!
//! Every coefficient is written with 17 significant digits, which makes the
//! round trip bit-exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Model, ModelKind, NnParams, PbParams, VtMicroParams};
use crate::error::{Error, Result};

const VERSION: u32 = 1;

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(xs: impl IntoIterator<Item = f64>) -> String {
    xs.into_iter().map(fmt_f64).collect::<Vec<_>>().join(", ")
}

impl Model {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model_kind: {}", self.kind());
        let _ = writeln!(out, "version: {VERSION}");
        match self {
            Model::VtMicro(p) => {
                for (name, c) in [("L", &p.l), ("M", &p.m)] {
                    for i in 0..4 {
                        for j in 0..4 {
                            let _ = writeln!(out, "{name}_{i}_{j} = {}", fmt_f64(c[i][j]));
                        }
                    }
                }
            }
            Model::Pb(p) => {
                for (k, c) in p.alpha.iter().enumerate() {
                    let _ = writeln!(out, "alpha_{} = {}", k + 1, fmt_f64(*c));
                }
            }
            Model::Nn(p) => {
                let _ = writeln!(out, "inputs = 2");
                let _ = writeln!(out, "hidden = {}", p.hidden_size());
                let _ = writeln!(out, "input_mean = {}", fmt_list(p.input_mean));
                let _ = writeln!(out, "input_std = {}", fmt_list(p.input_std));
                let _ = writeln!(out, "w1 = {}", fmt_list(p.w1.iter().flatten().copied()));
                let _ = writeln!(out, "b1 = {}", fmt_list(p.b1.iter().copied()));
                let _ = writeln!(out, "w2 = {}", fmt_list(p.w2.iter().copied()));
                let _ = writeln!(out, "b2 = {}", fmt_f64(p.b2));
            }
        }
        out
    }

    /// Parses a model document; `origin` names the source in error messages.
    pub fn from_text(text: &str, origin: &Path) -> Result<Model> {
        let mut header: HashMap<&str, (usize, &str)> = HashMap::new();
        let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (map, key, value) = if let Some((k, v)) = line.split_once('=') {
                (&mut fields, k, v)
            } else if let Some((k, v)) = line.split_once(':') {
                (&mut header, k, v)
            } else {
                return Err(Error::parse(origin, no + 1, format!("unrecognised line `{line}`")));
            };
            if map.insert(key.trim(), (no + 1, value.trim())).is_some() {
                return Err(Error::parse(origin, no + 1, format!("duplicate key `{}`", key.trim())));
            }
        }

        let (line, kind) = header
            .get("model_kind")
            .ok_or_else(|| Error::parse(origin, 1, "missing `model_kind`"))?;
        let kind: ModelKind = kind.parse().map_err(|e: String| Error::parse(origin, *line, e))?;
        match header.get("version") {
            Some((_, v)) if v.parse::<u32>() == Ok(VERSION) => {}
            Some((line, v)) => {
                return Err(Error::parse(origin, *line, format!("unsupported version `{v}`")))
            }
            None => return Err(Error::parse(origin, 1, "missing `version`")),
        }

        let get = |key: &str| -> Result<(usize, &str)> {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| Error::parse(origin, 0, format!("missing field `{key}`")))
        };
        let scalar = |key: &str| -> Result<f64> {
            let (line, v) = get(key)?;
            v.parse::<f64>()
                .map_err(|e| Error::parse(origin, line, format!("`{key}`: {e}")))
        };
        let list = |key: &str, len: usize| -> Result<Vec<f64>> {
            let (line, v) = get(key)?;
            let xs = v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(origin, line, format!("`{key}`: {e}")))?;
            if xs.len() != len {
                return Err(Error::parse(
                    origin,
                    line,
                    format!("`{key}` has {} values, expected {len}", xs.len()),
                ));
            }
            Ok(xs)
        };

        let model = match kind {
            ModelKind::VtMicro => {
                let mut p = VtMicroParams::zeros();
                for (name, c) in [("L", &mut p.l), ("M", &mut p.m)] {
                    for i in 0..4 {
                        for j in 0..4 {
                            c[i][j] = scalar(&format!("{name}_{i}_{j}"))?;
                        }
                    }
                }
                Model::VtMicro(p)
            }
            ModelKind::Pb => {
                let mut alpha = [0.0; 4];
                for (k, c) in alpha.iter_mut().enumerate() {
                    *c = scalar(&format!("alpha_{}", k + 1))?;
                }
                Model::Pb(PbParams::new(alpha))
            }
            ModelKind::Nn => {
                let (line, h) = get("hidden")?;
                let hidden: usize = h
                    .parse()
                    .map_err(|e| Error::parse(origin, line, format!("`hidden`: {e}")))?;
                let (line, i) = get("inputs")?;
                if i != "2" {
                    return Err(Error::parse(origin, line, "only 2 inputs are supported"));
                }
                let mean = list("input_mean", 2)?;
                let std = list("input_std", 2)?;
                let w1 = list("w1", 2 * hidden)?;
                let p = NnParams {
                    input_mean: [mean[0], mean[1]],
                    input_std: [std[0], std[1]],
                    w1: w1.chunks(2).map(|r| [r[0], r[1]]).collect(),
                    b1: list("b1", hidden)?,
                    w2: list("w2", hidden)?,
                    b2: scalar("b2")?,
                };
                p.validate()?;
                Model::Nn(p)
            }
        };
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_text(&text, path)
    }
}
