use std::fmt::Write as _;

use crate::error::Result;
use crate::estimators::Model;
use crate::exec::Execution;
use crate::pipeline::SyncedDataset;

/// Outcome of fitting one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: Model,
    /// MSE over the records used for fitting, (l/h)².
    pub train_mse: f64,
    /// MSE over the held-out records, when a test set was supplied.
    pub test_mse: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    /// Records dropped by the model's domain rules (e.g. zero fuel flow).
    pub n_excluded: usize,
    /// Network restarts that ran to completion.
    pub restarts_run: Option<usize>,
    /// Condition number estimate of the least-squares design.
    pub condition_estimate: Option<f64>,
}

pub(crate) fn mse(model: &Model, ds: &SyncedDataset, exec: Execution) -> Result<f64> {
    if ds.is_empty() {
        return Ok(0.0);
    }
    let pred = model.predict_dataset(ds, exec)?;
    let sum: f64 = pred.iter().zip(&ds.f).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / ds.len() as f64)
}

impl FitReport {
    /// Scores the fitted model on held-out records.
    pub fn evaluate_test(&mut self, test: &SyncedDataset) -> Result<()> {
        self.test_mse = Some(mse(&self.model, test, Execution::default())?);
        self.n_test = test.len();
        Ok(())
    }

    /// Flat `key = value` document, followed by the model coefficients.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let _ = writeln!(out, "model_kind = {}", self.model.kind());
        let _ = writeln!(out, "train_mse = {:.16e}", self.train_mse);
        let _ = writeln!(out, "test_mse = {}", opt(self.test_mse));
        let _ = writeln!(out, "n_train = {}", self.n_train);
        let _ = writeln!(out, "n_test = {}", self.n_test);
        let _ = writeln!(out, "n_excluded = {}", self.n_excluded);
        let _ = writeln!(
            out,
            "restarts_run = {}",
            self.restarts_run.map(|r| r.to_string()).unwrap_or_default()
        );
        let _ = writeln!(out, "condition_estimate = {}", opt(self.condition_estimate));
        for line in self.model.to_text().lines().skip(2) {
            let _ = writeln!(out, "param.{line}");
        }
        out
    }
}
