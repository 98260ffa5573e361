//! Evaluation kernels for the three fuel-flow estimators.

mod nn;
mod pb;
mod persist;
mod vt_micro;

pub use nn::{NnParams, DEFAULT_HIDDEN};
pub use pb::PbParams;
pub use vt_micro::{monomials, VtMicroParams, DEFAULT_LOG_BOUND};

use std::fmt;
use std::str::FromStr;

use crate::error::Result;
use crate::exec::Execution;
use crate::pipeline::SyncedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    VtMicro,
    Pb,
    Nn,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::VtMicro => "vtmicro",
            ModelKind::Pb => "pb",
            ModelKind::Nn => "nn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "vtmicro" => Ok(ModelKind::VtMicro),
            "pb" => Ok(ModelKind::Pb),
            "nn" => Ok(ModelKind::Nn),
            other => Err(format!("unknown model kind `{other}` (expected vtmicro|pb|nn)")),
        }
    }
}

/// Any of the three fitted estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    VtMicro(VtMicroParams),
    Pb(PbParams),
    Nn(NnParams),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::VtMicro(_) => ModelKind::VtMicro,
            Model::Pb(_) => ModelKind::Pb,
            Model::Nn(_) => ModelKind::Nn,
        }
    }

    /// Predicted fuel flow in l/h for speed `v` (km/h) and acceleration `a`
    /// (m/s²).
    pub fn predict(&self, v: f64, a: f64) -> Result<f64> {
        match self {
            Model::VtMicro(p) => p.predict(v, a),
            Model::Pb(p) => Ok(p.predict(v, a)),
            Model::Nn(p) => Ok(p.predict(v, a)),
        }
    }

    /// Predicts every record of `ds`.
    pub fn predict_dataset(&self, ds: &SyncedDataset, exec: Execution) -> Result<Vec<f64>> {
        exec.map_chunks(ds.len(), 4096, |s, e| {
            (s..e)
                .map(|i| self.predict(ds.v[i], ds.a[i]))
                .collect::<Result<Vec<f64>>>()
        })
        .into_iter()
        .try_fold(Vec::with_capacity(ds.len()), |mut acc, part| {
            acc.extend(part?);
            Ok(acc)
        })
    }
}

impl From<VtMicroParams> for Model {
    fn from(p: VtMicroParams) -> Self {
        Model::VtMicro(p)
    }
}

impl From<PbParams> for Model {
    fn from(p: PbParams) -> Self {
        Model::Pb(p)
    }
}

impl From<NnParams> for Model {
    fn from(p: NnParams) -> Self {
        Model::Nn(p)
    }
}
