//! Parameter identification for the three estimators.

pub mod lbfgs;
mod linear;
mod lstsq;
mod nn;
mod report;
mod split;

pub use linear::{fit_pb, fit_vt_micro, VT_MICRO_MIN_ROWS};
pub use lstsq::{solve_least_squares, LsSolution};
pub use nn::{fit_nn, standardization, sweep_hidden, NnFitConfig, NnObjective, DEFAULT_RESTARTS};
pub use report::FitReport;
pub use split::{split, SplitMode, SplitSpec};
