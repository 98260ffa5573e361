use crate::error::{Error, Result};

/// Default hidden-layer width.
pub const DEFAULT_HIDDEN: usize = 9;

/// Feedforward network `2 -> hidden (tanh) -> 1 (linear)` on standardized
/// `(v, a)` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NnParams {
    pub input_mean: [f64; 2],
    pub input_std: [f64; 2],
    /// Hidden weights, one `[w_v, w_a]` row per hidden unit.
    pub w1: Vec<[f64; 2]>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl NnParams {
    /// All-zero weights with identity input scaling.
    pub fn zeros(hidden: usize) -> Self {
        Self {
            input_mean: [0.0; 2],
            input_std: [1.0; 2],
            w1: vec![[0.0; 2]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w1.len()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.w1.len();
        if h == 0 || self.b1.len() != h || self.w2.len() != h {
            return Err(Error::InvalidParameter(format!(
                "inconsistent network dimensions: w1 {h}, b1 {}, w2 {}",
                self.b1.len(),
                self.w2.len()
            )));
        }
        if !self.input_std.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter("input_std must be positive".into()));
        }
        let finite = self.input_mean.iter().all(|x| x.is_finite())
            && self.w1.iter().flatten().all(|x| x.is_finite())
            && self.b1.iter().chain(&self.w2).all(|x| x.is_finite())
            && self.b2.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("non-finite network weight".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn standardize(&self, v: f64, a: f64) -> [f64; 2] {
        [
            (v - self.input_mean[0]) / self.input_std[0],
            (a - self.input_mean[1]) / self.input_std[1],
        ]
    }

    /// Network output before the non-negativity clamp.
    pub fn raw(&self, v: f64, a: f64) -> f64 {
        let z = self.standardize(v, a);
        let mut out = self.b2;
        for k in 0..self.w1.len() {
            let pre = self.w1[k][0] * z[0] + self.w1[k][1] * z[1] + self.b1[k];
            out += self.w2[k] * pre.tanh();
        }
        out
    }

    /// Fuel flow in l/h, clamped at zero.
    pub fn predict(&self, v: f64, a: f64) -> f64 {
        self.raw(v, a).max(0.0)
    }
}
