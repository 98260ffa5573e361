use crate::error::{Error, Result};

/// Default bound on the log-domain sum before exponentiation.
pub const DEFAULT_LOG_BOUND: f64 = 50.0;

/// Monomials `v^i a^j` for `i, j in 0..4`, laid out at index `4 * i + j`.
#[inline]
pub fn monomials(v: f64, a: f64) -> [f64; 16] {
    let vp = [1.0, v, v * v, v * v * v];
    let ap = [1.0, a, a * a, a * a * a];
    let mut out = [0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            out[4 * i + j] = vp[i] * ap[j];
        }
    }
    out
}

/// Log-polynomial model with separate coefficient sets for non-negative
/// (`l`) and negative (`m`) acceleration. `l[i][j]` multiplies `v^i a^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct VtMicroParams {
    pub l: [[f64; 4]; 4],
    pub m: [[f64; 4]; 4],
}

impl VtMicroParams {
    pub fn zeros() -> Self {
        Self {
            l: [[0.0; 4]; 4],
            m: [[0.0; 4]; 4],
        }
    }

    /// Coefficients of the branch that serves acceleration `a`.
    pub fn branch(&self, a: f64) -> &[[f64; 4]; 4] {
        if a >= 0.0 {
            &self.l
        } else {
            &self.m
        }
    }

    pub fn log_flow(&self, v: f64, a: f64) -> f64 {
        let c = self.branch(a);
        let terms = monomials(v, a);
        let mut sum = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                sum += c[i][j] * terms[4 * i + j];
            }
        }
        sum
    }

    /// Fuel flow in l/h; always strictly positive.
    pub fn predict(&self, v: f64, a: f64) -> Result<f64> {
        self.predict_bounded(v, a, DEFAULT_LOG_BOUND)
    }

    pub fn predict_bounded(&self, v: f64, a: f64, log_bound: f64) -> Result<f64> {
        let s = self.log_flow(v, a);
        if !(s <= log_bound) {
            return Err(Error::NumericOverflow {
                value: s,
                bound: log_bound,
            });
        }
        Ok(s.exp())
    }

    pub fn is_finite(&self) -> bool {
        self.l.iter().chain(&self.m).flatten().all(|c| c.is_finite())
    }
}
