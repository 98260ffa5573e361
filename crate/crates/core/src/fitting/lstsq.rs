use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solution of a dense linear least-squares problem.
#[derive(Debug, Clone)]
pub struct LsSolution {
    pub coef: Vec<f64>,
    /// Ratio of extreme singular values of the column-equilibrated design.
    pub condition: f64,
}

/// Minimizes `||X c - y||₂` through a singular value decomposition of the
/// column-equilibrated design matrix. `design` is row-major with `cols`
/// columns.
///
/// Fails with `RankDeficient` when the numerical rank is below `cols`.
pub fn solve_least_squares(design: &[f64], cols: usize, y: &[f64], what: &str) -> Result<LsSolution> {
    let rows = y.len();
    if design.len() != rows * cols {
        return Err(Error::LengthMismatch {
            left: design.len(),
            right: rows * cols,
        });
    }
    if rows < cols {
        return Err(Error::InsufficientData {
            rule: format!("{what}: {rows} rows for {cols} unknowns"),
        });
    }
    let mut x = DMatrix::from_row_slice(rows, cols, design);
    let mut scale = Vec::with_capacity(cols);
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let norm = col.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::RankDeficient {
                rule: format!("{what}: regressor column {j} is identically zero"),
            });
        }
        col /= norm;
        scale.push(norm);
    }

    let svd = x.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let tol = smax * rows.max(cols) as f64 * f64::EPSILON;
    let rank = sv.iter().filter(|s| **s > tol).count();
    if rank < cols {
        return Err(Error::RankDeficient {
            rule: format!("{what}: numerical rank {rank} < {cols}"),
        });
    }
    let rhs = DVector::from_column_slice(y);
    let c = svd
        .solve(&rhs, tol)
        .map_err(|e| Error::InvalidParameter(format!("{what}: {e}")))?;
    let coef = c.iter().zip(&scale).map(|(ci, s)| ci / s).collect();
    Ok(LsSolution {
        coef,
        condition: smax / smin,
    })
}
