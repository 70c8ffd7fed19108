//! Parameter search: conjugate gradient, finite differences, grids and
//! depth sweeps.

mod cg;
mod fd;
mod grid;
mod objective;

pub use cg::{maximize, CgVariant, OptimConfig, OptimResult, StopReason, TraceEntry};
pub use fd::finite_diff_gradient;
pub use grid::{depth_samples, grid_eval_2d, sweep_depth, DepthSpacing, FocalCurve, Grid2d};
pub use objective::{FocusObjective, GradientMode};

use crate::error::OptimError;

/// A scalar function of θ to be maximized.
pub trait ObjectiveFn: Sync {
    fn dim(&self) -> usize;

    fn value(&self, theta: &[f64]) -> Result<f64, OptimError>;

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>), OptimError>;
}

/// Closure-backed objective; the closure returns the value and gradient.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> ObjectiveFn for FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[f64]) -> Result<f64, OptimError> {
        Ok((self.f)(theta).0)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>), OptimError> {
        Ok((self.f)(theta))
    }
}

pub(crate) fn finite(theta: &[f64], v: f64) -> Result<f64, OptimError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OptimError::NonFinite { theta: theta.to_vec() })
    }
}
