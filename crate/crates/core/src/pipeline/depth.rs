use std::path::Path;

use rayon::prelude::*;

use super::{create, csv_writer, finish, fmt_sig};
use crate::error::{DataError, Error, OptimError, Result};
use crate::event::{CameraGeometry, EventWindow, PoseTrack};
use crate::image::ImageGrid;
use crate::iwe::{accumulate_iwe, IweOptions};
use crate::loss::LossSpec;
use crate::optim::{depth_samples, sweep_depth, DepthSpacing, FocalCurve, FocusObjective};
use crate::scalar::Scalar;
use crate::warp::{DepthWarp, Warp};

#[derive(Debug, Clone)]
pub struct DepthConfig {
    /// Global focal curves for every loss; the first loss also drives the
    /// per-pixel maps.
    pub losses: Vec<LossSpec>,
    pub z_min: f64,
    pub z_max: f64,
    pub steps: usize,
    pub spacing: DepthSpacing,
    pub polarity: bool,
    /// Fraction of candidate pixels kept, ranked by confidence.
    pub keep_fraction: f64,
    /// Minimum number of events in the 3x3 patch at the chosen depth.
    pub min_events: f64,
    /// Gaussian weight of the 3x3 patch.
    pub patch_sigma: f64,
    /// 3x3 median filter over valid depths.
    pub median: bool,
}

impl DepthConfig {
    pub fn new(losses: Vec<LossSpec>, z_min: f64, z_max: f64, steps: usize) -> Self {
        Self {
            losses,
            z_min,
            z_max,
            steps,
            spacing: DepthSpacing::InverseDepth,
            polarity: false,
            keep_fraction: 0.3,
            min_events: 3.0,
            patch_sigma: 1.0,
            median: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.losses.is_empty() {
            return Err(Error::Config("at least one loss is required".into()));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::Config("keep fraction must lie in (0, 1]".into()));
        }
        if !(self.patch_sigma > 0.0) {
            return Err(Error::Config("patch sigma must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DepthMap {
    /// Depth samples, ascending.
    pub depths: Vec<f64>,
    /// `(loss name, curve over the whole image)` in configuration order.
    pub curves: Vec<(String, FocalCurve)>,
    /// Extremal depth per pixel; zero where invalid.
    pub depth: ImageGrid<f64>,
    /// Sense-adjusted extremal patch focus; zero where invalid.
    pub confidence: ImageGrid<f64>,
    /// Extremal sample index per pixel, meaningful where `valid`.
    pub sample: ImageGrid<f64>,
    pub valid: Vec<bool>,
}

impl DepthMap {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

fn patch_weights(sigma: f64) -> [f64; 9] {
    std::array::from_fn(|k| {
        let (dx, dy) = ((k % 3) as f64 - 1.0, (k / 3) as f64 - 1.0);
        (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    })
}

fn patch<T: Scalar>(img: &ImageGrid<T>, x: usize, y: usize, w: &[f64; 9]) -> ImageGrid<T> {
    ImageGrid::from_fn(3, 3, |i, j| img.get_clamped(x as isize + i as isize - 1, y as isize + j as isize - 1) * T::lit(w[j * 3 + i]))
}

/// Plane-sweep depth over the whole event window: global focal curves and
/// a semi-dense per-pixel depth map from 3x3 Gaussian-weighted patches of
/// the DSI slices.
pub fn run_depth<T: Scalar>(window: &EventWindow, camera: &CameraGeometry, track: &PoseTrack, cfg: &DepthConfig) -> Result<DepthMap> {
    cfg.validate()?;
    if window.is_empty() {
        return Err(DataError::EmptyWindow.into());
    }
    let warp = Warp::Depth(DepthWarp::new(camera.clone(), track.clone(), window.t_ref)?);
    let opts = IweOptions::new(camera.width, camera.height).with_polarity(cfg.polarity);
    opts.validate()?;

    let mut curves = Vec::with_capacity(cfg.losses.len());
    for spec in &cfg.losses {
        let obj = FocusObjective::<T>::new(window, &warp, *spec, opts);
        let curve = sweep_depth(
            |z| match obj.loss_value(&[z]) {
                Err(OptimError::Loss(_)) => Ok(f64::NAN),
                other => other,
            },
            cfg.z_min,
            cfg.z_max,
            cfg.steps,
            cfg.spacing,
            spec.sense(),
        )?;
        curves.push((spec.name(), curve));
    }
    let depths = depth_samples(cfg.z_min, cfg.z_max, cfg.steps, cfg.spacing);

    let slices = depths.par_iter().map(|&z| accumulate_iwe::<T>(window, &warp, &[z], &opts).map(|i| i.image)).collect::<Result<Vec<_>, _>>()?;
    let counts = if cfg.polarity {
        let plain = opts.with_polarity(false);
        depths.par_iter().map(|&z| accumulate_iwe::<T>(window, &warp, &[z], &plain).map(|i| i.image)).collect::<Result<Vec<_>, _>>()?
    } else {
        slices.clone()
    };

    let spec = cfg.losses[0];
    let sign = spec.sense().sign();
    let weights = patch_weights(cfg.patch_sigma);
    let (w, h) = (camera.width, camera.height);
    // Per pixel: (sample index, sense-adjusted focus, candidate flag).
    let per_pixel: Vec<(usize, f64, bool)> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (idx % w, idx / w);
            let curve: Vec<f64> = slices.iter().map(|s| spec.value(&patch(s, x, y, &weights)).map_or(f64::NAN, |v| sign * v.as_f64())).collect();
            let (mut best, mut lo, mut hi) = (0, f64::INFINITY, f64::NEG_INFINITY);
            for (i, &v) in curve.iter().enumerate() {
                if v.is_nan() {
                    continue;
                }
                if curve[best].is_nan() || v > curve[best] {
                    best = i;
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let prominent = hi - lo > 1e-9 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
            let events: f64 =
                (0..9).map(|k| counts[best].get_clamped(x as isize + (k % 3) as isize - 1, y as isize + (k / 3) as isize - 1).as_f64()).sum();
            let candidate = prominent && hi.is_finite() && events >= cfg.min_events;
            (best, curve[best], candidate)
        })
        .collect();

    let mut conf: Vec<f64> = per_pixel.iter().filter(|p| p.2).map(|p| p.1).collect();
    conf.sort_by(|a, b| b.total_cmp(a));
    let keep = ((conf.len() as f64 * cfg.keep_fraction).ceil() as usize).min(conf.len());
    let threshold = if keep == 0 { f64::INFINITY } else { conf[keep - 1] };

    let valid: Vec<bool> = per_pixel.iter().map(|p| p.2 && p.1 >= threshold).collect();
    let sample = ImageGrid::from_fn(w, h, |x, y| per_pixel[y * w + x].0 as f64);
    let mut depth = ImageGrid::from_fn(w, h, |x, y| if valid[y * w + x] { depths[per_pixel[y * w + x].0] } else { 0.0 });
    let confidence = ImageGrid::from_fn(w, h, |x, y| if valid[y * w + x] { per_pixel[y * w + x].1 } else { 0.0 });
    if cfg.median {
        depth = median_valid(&depth, &valid);
    }
    Ok(DepthMap { depths, curves, depth, confidence, sample, valid })
}

/// 3x3 median over valid neighbours, applied at valid pixels only.
fn median_valid(img: &ImageGrid<f64>, valid: &[bool]) -> ImageGrid<f64> {
    let (w, h) = (img.width(), img.height());
    ImageGrid::from_fn(w, h, |x, y| {
        if !valid[y * w + x] {
            return 0.0;
        }
        let mut v: Vec<f64> = Vec::with_capacity(9);
        for ny in y.saturating_sub(1)..(y + 2).min(h) {
            for nx in x.saturating_sub(1)..(x + 2).min(w) {
                if valid[ny * w + nx] {
                    v.push(img.get(nx, ny));
                }
            }
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    })
}

/// `focal_curves.csv`, `depth.pfm` and `confidence.pfm` under `dir`.
pub fn write_focal_curves_csv(map: &DepthMap, dir: &Path) -> Result<()> {
    let path = dir.join("focal_curves.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["depth".to_string()];
    for (name, _) in &map.curves {
        header.push(name.clone());
        header.push(format!("{name}_normalized"));
    }
    w.write_record(&header)?;
    for (i, z) in map.depths.iter().enumerate() {
        let mut rec = vec![fmt_sig(*z)];
        for (_, c) in &map.curves {
            rec.push(fmt_sig(c.values[i]));
            rec.push(fmt_sig(c.normalized[i]));
        }
        w.write_record(&rec)?;
    }
    finish(w, &path)?;
    for (name, img) in [("depth.pfm", &map.depth), ("confidence.pfm", &map.confidence)] {
        let path = dir.join(name);
        img.write_pfm(create(&path)?).map_err(|source| Error::Output { path, source })?;
    }
    Ok(())
}
