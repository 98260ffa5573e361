use std::collections::HashSet;

use super::lstsq::solve_least_squares;
use super::report::{mse, FitReport};
use crate::error::{Error, Result};
use crate::estimators::{monomials, Model, PbParams, VtMicroParams};
use crate::exec::Execution;
use crate::pipeline::SyncedDataset;

/// Minimum records (and distinct `(v, a)` pairs) per acceleration branch.
pub const VT_MICRO_MIN_ROWS: usize = 16;

fn fit_branch(ds: &SyncedDataset, rows: &[usize], name: &str) -> Result<([[f64; 4]; 4], f64)> {
    let distinct: HashSet<(u64, u64)> = rows
        .iter()
        .map(|&i| (ds.v[i].to_bits(), ds.a[i].to_bits()))
        .collect();
    if rows.len() < VT_MICRO_MIN_ROWS || distinct.len() < VT_MICRO_MIN_ROWS {
        return Err(Error::InsufficientData {
            rule: format!(
                "VT-MICRO {name} branch needs {VT_MICRO_MIN_ROWS} records with f > 0 at distinct (v, a); \
                 got {} records, {} distinct",
                rows.len(),
                distinct.len()
            ),
        });
    }
    let design: Vec<f64> = rows
        .iter()
        .flat_map(|&i| monomials(ds.v[i], ds.a[i]))
        .collect();
    let target: Vec<f64> = rows.iter().map(|&i| ds.f[i].ln()).collect();
    let sol = solve_least_squares(&design, 16, &target, &format!("VT-MICRO {name} branch"))?;
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = sol.coef[4 * i + j];
        }
    }
    Ok((c, sol.condition))
}

/// Fits both VT-MICRO branches by least squares on `ln f`. Records with
/// `f = 0` are excluded; `a >= 0` records train `L`, the rest train `M`.
pub fn fit_vt_micro(train: &SyncedDataset) -> Result<FitReport> {
    let used: Vec<usize> = (0..train.len()).filter(|&i| train.f[i] > 0.0).collect();
    let (pos, neg): (Vec<usize>, Vec<usize>) = used.iter().partition(|&&i| train.a[i] >= 0.0);
    let (l, cond_l) = fit_branch(train, &pos, "positive-acceleration")?;
    let (m, cond_m) = fit_branch(train, &neg, "negative-acceleration")?;

    let model = Model::VtMicro(VtMicroParams { l, m });
    let fitted = train.select(&used);
    Ok(FitReport {
        train_mse: mse(&model, &fitted, Execution::default())?,
        model,
        test_mse: None,
        n_train: used.len(),
        n_test: 0,
        n_excluded: train.len() - used.len(),
        restarts_run: None,
        condition_estimate: Some(cond_l.max(cond_m)),
    })
}

/// Fits the power-balance model by least squares of `f` on
/// `(a·v, v, v², v³)` over records with `f > 0`.
pub fn fit_pb(train: &SyncedDataset) -> Result<FitReport> {
    let used: Vec<usize> = (0..train.len()).filter(|&i| train.f[i] > 0.0).collect();
    if used.len() < 4 {
        return Err(Error::InsufficientData {
            rule: format!("PB needs 4 records with f > 0; got {}", used.len()),
        });
    }
    let design: Vec<f64> = used
        .iter()
        .flat_map(|&i| PbParams::regressors(train.v[i], train.a[i]))
        .collect();
    let target: Vec<f64> = used.iter().map(|&i| train.f[i]).collect();
    let sol = solve_least_squares(&design, 4, &target, "PB")?;

    let model = Model::Pb(PbParams::new([sol.coef[0], sol.coef[1], sol.coef[2], sol.coef[3]]));
    let fitted = train.select(&used);
    Ok(FitReport {
        train_mse: mse(&model, &fitted, Execution::default())?,
        model,
        test_mse: None,
        n_train: used.len(),
        n_test: 0,
        n_excluded: train.len() - used.len(),
        restarts_run: None,
        condition_estimate: Some(sol.condition),
    })
}
