use std::path::Path;

use super::{create, csv_writer, finish, fmt_sig};
use crate::error::{DataError, Error, OptimError, Result};
use crate::event::{Event, EventWindow, RefTime};
use crate::image::ImageGrid;
use crate::iwe::IweOptions;
use crate::loss::{LossSpec, Sense};
use crate::optim::{grid_eval_2d, FocusObjective, Grid2d};
use crate::scalar::Scalar;
use crate::warp::Warp;

/// Pixel rectangle and optional time span selecting a patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchSpec {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
}

/// Events inside the patch, shifted to patch coordinates.
pub fn crop_patch(events: &[Event], patch: &PatchSpec) -> Result<EventWindow, DataError> {
    let (x0, y0) = (patch.x0 as f64, patch.y0 as f64);
    let inside = |e: &&Event| {
        e.x >= x0
            && e.y >= y0
            && e.x < x0 + patch.width as f64
            && e.y < y0 + patch.height as f64
            && patch.t0.is_none_or(|t| e.t >= t)
            && patch.t1.is_none_or(|t| e.t < t)
    };
    let picked: Vec<Event> = events.iter().filter(inside).map(|e| Event::new(e.t, e.x - x0, e.y - y0, e.polarity)).collect();
    if picked.is_empty() {
        return Err(DataError::EmptyWindow);
    }
    Ok(EventWindow::new(picked, RefTime::Mid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSurface {
    pub loss: String,
    pub sense: Sense,
    pub grid: Grid2d,
}

impl FlowSurface {
    /// Best cell in the loss sense, as `(vx, vy)`.
    pub fn best(&self) -> [f64; 2] {
        self.grid.at(self.grid.extremum(self.sense))
    }
}

/// Loss surfaces over a `steps x steps` grid of flows around `center`.
/// Cells where a loss is undefined hold NaN and never win.
#[allow(clippy::too_many_arguments)]
pub fn run_flow_surface<T: Scalar>(
    window: &EventWindow,
    width: usize,
    height: usize,
    losses: &[LossSpec],
    polarity: bool,
    center: [f64; 2],
    half_span: [f64; 2],
    steps: usize,
) -> Result<Vec<FlowSurface>> {
    if window.is_empty() {
        return Err(DataError::EmptyWindow.into());
    }
    let opts = IweOptions::new(width, height).with_polarity(polarity);
    opts.validate()?;
    let warp = Warp::Flow;
    losses
        .iter()
        .map(|spec| {
            let obj = FocusObjective::<T>::new(window, &warp, *spec, opts);
            let grid = grid_eval_2d(
                |v| match obj.loss_value(v) {
                    Err(OptimError::Loss(_)) => Ok(f64::NAN),
                    other => other,
                },
                center,
                half_span,
                steps,
            )?;
            Ok(FlowSurface { loss: spec.name(), sense: spec.sense(), grid })
        })
        .collect()
}

/// `<loss>.csv` with one row per cell and `<loss>.pgm`, the normalized
/// surface with `vy` growing downwards.
pub fn write_surface_csv(surface: &FlowSurface, dir: &Path) -> Result<()> {
    let g = &surface.grid;
    let norm = g.normalized();
    let path = dir.join(format!("{}.csv", surface.loss));
    let mut w = csv_writer(&path)?;
    w.write_record(["vx", "vy", "value", "normalized"])?;
    for (i, (&v, &n)) in g.values.iter().zip(&norm).enumerate() {
        let [vx, vy] = g.at(i);
        w.write_record([fmt_sig(vx), fmt_sig(vy), fmt_sig(v), fmt_sig(n)])?;
    }
    finish(w, &path)?;
    let path = dir.join(format!("{}.pgm", surface.loss));
    let img = ImageGrid::from_vec(g.steps, g.steps, norm);
    img.write_pgm(create(&path)?, 8).map_err(|source| Error::Output { path, source })
}
