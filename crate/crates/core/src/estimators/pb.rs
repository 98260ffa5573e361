/// Four-parameter power-balance model.
///
/// `alpha[0]` multiplies `a·v`, `alpha[1]` multiplies `v`, `alpha[2]` `v²` and
/// `alpha[3]` `v³`. Vehicle mass, the drag polynomial and the fuel/power
/// proportionality constant are all absorbed into these four numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbParams {
    pub alpha: [f64; 4],
}

impl PbParams {
    pub fn new(alpha: [f64; 4]) -> Self {
        Self { alpha }
    }

    /// The regressors `(a·v, v, v², v³)`.
    #[inline]
    pub fn regressors(v: f64, a: f64) -> [f64; 4] {
        [a * v, v, v * v, v * v * v]
    }

    /// Polynomial value before clamping; negative while braking or coasting.
    #[inline]
    pub fn raw(&self, v: f64, a: f64) -> f64 {
        Self::regressors(v, a)
            .iter()
            .zip(&self.alpha)
            .map(|(x, c)| x * c)
            .sum()
    }

    /// Fuel flow in l/h, clamped at zero.
    #[inline]
    pub fn predict(&self, v: f64, a: f64) -> f64 {
        self.raw(v, a).max(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().all(|c| c.is_finite())
    }
}
