use rayon::prelude::*;

use crate::error::OptimError;
use crate::loss::Sense;

/// Dense evaluation of a 2-D objective on a uniform grid.
///
/// `values[row * steps + col]` is the value at `(xs[col], ys[row])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2d {
    pub steps: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
    /// Row-major index of the first maximal cell.
    pub argmax: usize,
    /// Row-major index of the first minimal cell.
    pub argmin: usize,
}

impl Grid2d {
    /// Extremal cell for the given sense.
    pub fn extremum(&self, sense: Sense) -> usize {
        match sense {
            Sense::Maximize => self.argmax,
            Sense::Minimize => self.argmin,
        }
    }

    /// Parameters `(x, y)` of a cell.
    pub fn at(&self, idx: usize) -> [f64; 2] {
        [self.xs[idx % self.steps], self.ys[idx / self.steps]]
    }

    /// Values rescaled to `[0, 1]`; constant grids map to zero.
    pub fn normalized(&self) -> Vec<f64> {
        normalize(&self.values)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub(crate) fn normalize(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// First index of the maximum and of the minimum, ignoring NaN.
fn arg_extrema(v: &[f64]) -> (usize, usize) {
    let (mut imax, mut imin) = (0, 0);
    for (i, &x) in v.iter().enumerate() {
        if x > v[imax] || v[imax].is_nan() {
            imax = i;
        }
        if x < v[imin] || v[imin].is_nan() {
            imin = i;
        }
    }
    (imax, imin)
}

/// Evaluate `f` on `steps x steps` points spanning `center ± half_span`.
/// Cells are evaluated in parallel; the output does not depend on the
/// evaluation order.
pub fn grid_eval_2d<F>(f: F, center: [f64; 2], half_span: [f64; 2], steps: usize) -> Result<Grid2d, OptimError>
where
    F: Fn(&[f64]) -> Result<f64, OptimError> + Sync,
{
    if steps < 2 {
        return Err(OptimError::Config("grid needs at least two steps per axis".into()));
    }
    let xs = linspace(center[0] - half_span[0], center[0] + half_span[0], steps);
    let ys = linspace(center[1] - half_span[1], center[1] + half_span[1], steps);
    let values = (0..steps * steps).into_par_iter().map(|i| f(&[xs[i % steps], ys[i / steps]])).collect::<Result<Vec<f64>, _>>()?;
    let (argmax, argmin) = arg_extrema(&values);
    Ok(Grid2d { steps, xs, ys, values, argmax, argmin })
}

/// Sampling of the depth axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepthSpacing {
    Linear,
    /// Uniform in `1/Z`.
    #[default]
    InverseDepth,
}

/// Loss as a function of depth, in ascending depth order.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalCurve {
    pub depths: Vec<f64>,
    pub values: Vec<f64>,
    /// Sample index of the extremum in the loss sense.
    pub extremum: usize,
    /// Values rescaled to `[0, 1]`.
    pub normalized: Vec<f64>,
}

/// Depth samples between `z_min` and `z_max`, ascending.
pub fn depth_samples(z_min: f64, z_max: f64, steps: usize, spacing: DepthSpacing) -> Vec<f64> {
    match spacing {
        DepthSpacing::Linear => linspace(z_min, z_max, steps),
        DepthSpacing::InverseDepth => linspace(1.0 / z_min, 1.0 / z_max, steps).into_iter().map(|d| 1.0 / d).collect(),
    }
}

/// Evaluate `f(Z)` on a depth grid and locate the extremal sample.
pub fn sweep_depth<F>(f: F, z_min: f64, z_max: f64, steps: usize, spacing: DepthSpacing, sense: Sense) -> Result<FocalCurve, OptimError>
where
    F: Fn(f64) -> Result<f64, OptimError> + Sync,
{
    if !(z_min > 0.0 && z_max > z_min) {
        return Err(OptimError::Config(format!("depth range must satisfy 0 < z_min < z_max, got [{z_min}, {z_max}]")));
    }
    if steps < 2 {
        return Err(OptimError::Config("depth sweep needs at least two samples".into()));
    }
    let depths = depth_samples(z_min, z_max, steps, spacing);
    let values = depths.par_iter().map(|&z| f(z)).collect::<Result<Vec<f64>, _>>()?;
    let (imax, imin) = arg_extrema(&values);
    let extremum = if sense == Sense::Maximize { imax } else { imin };
    let normalized = normalize(&values);
    Ok(FocalCurve { depths, values, extremum, normalized })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_bowl_peaks_at_center() {
        let g = grid_eval_2d(|t| Ok(-(t[0] * t[0] + t[1] * t[1])), [0.0, 0.0], [60.0, 60.0], 41).unwrap();
        assert_eq!(g.argmax, 20 * 41 + 20);
        assert_eq!(g.at(g.argmax), [0.0, 0.0]);
        assert_eq!(g.values.len(), 41 * 41);
    }

    #[test]
    fn constant_grid_picks_first_cell() {
        let g = grid_eval_2d(|_| Ok(1.5), [3.0, -1.0], [1.0, 1.0], 5).unwrap();
        assert_eq!((g.argmax, g.argmin), (0, 0));
        assert!(g.normalized().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn refinement_keeps_the_peak_cell() {
        let f = |t: &[f64]| Ok(-((t[0] + 37.0).powi(2) + 0.5 * (t[1] - 4.0).powi(2)));
        let coarse = grid_eval_2d(f, [0.0, 0.0], [60.0, 60.0], 11).unwrap();
        let fine = grid_eval_2d(f, [0.0, 0.0], [60.0, 60.0], 21).unwrap();
        let (c, p) = (coarse.at(coarse.argmax), fine.at(fine.argmax));
        let cell = 120.0 / 10.0;
        assert!((c[0] - p[0]).abs() <= cell / 2.0 && (c[1] - p[1]).abs() <= cell / 2.0, "{c:?} {p:?}");
    }

    #[test]
    fn inverse_depth_samples_are_uniform_in_disparity() {
        let d = depth_samples(0.5, 4.0, 8, DepthSpacing::InverseDepth);
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[7] - 4.0).abs() < 1e-12);
        let inv: Vec<f64> = d.iter().map(|z| 1.0 / z).collect();
        let step = inv[0] - inv[1];
        assert!(inv.windows(2).all(|w| ((w[0] - w[1]) - step).abs() < 1e-12));
    }

    #[test]
    fn sweep_locates_extremum_by_sense() {
        let f = |z: f64| Ok(-(z - 1.1).powi(2));
        let max = sweep_depth(f, 0.5, 3.0, 40, DepthSpacing::Linear, Sense::Maximize).unwrap();
        assert!((max.depths[max.extremum] - 1.1).abs() <= 2.5 / 39.0 / 2.0 + 1e-12);
        let min = sweep_depth(|z| Ok((z - 1.1).powi(2)), 0.5, 3.0, 40, DepthSpacing::Linear, Sense::Minimize).unwrap();
        assert_eq!(min.extremum, max.extremum);
        assert!(sweep_depth(f, 2.0, 1.0, 10, DepthSpacing::Linear, Sense::Maximize).is_err());
    }
}
