use std::path::Path;

use rayon::prelude::*;

use super::{csv_writer, finish, fmt_sig, opt_sig};
use crate::error::Result;
use crate::event::{slice_by_count, CameraGeometry, Event, PoseTrack, RefTime};
use crate::iwe::{IweOptions, Splat};
use crate::loss::LossSpec;
use crate::optim::{maximize, FocusObjective, OptimConfig};
use crate::scalar::Scalar;
use crate::warp::Warp;

#[derive(Debug, Clone)]
pub struct AngvelConfig {
    pub losses: Vec<LossSpec>,
    pub polarity: bool,
    /// Events per window; windows do not overlap.
    pub n_events: usize,
    pub splat: Splat,
    pub ref_time: RefTime,
    pub optim: OptimConfig,
}

impl AngvelConfig {
    pub fn new(losses: Vec<LossSpec>, n_events: usize) -> Self {
        Self { losses, polarity: false, n_events, splat: Splat::default(), ref_time: RefTime::Mid, optim: OptimConfig::default() }
    }
}

/// One window of one loss. Angular rates in rad/s, errors in deg/s.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate {
    pub loss: String,
    pub window: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub t_mid: f64,
    /// `None` if the optimizer failed on this window.
    pub estimate: Option<[f64; 3]>,
    pub truth: Option<[f64; 3]>,
    pub error_dps: Option<[f64; 3]>,
    pub iterations: usize,
    pub converged: bool,
}

/// Mean, standard deviation and RMS of one error component, in deg/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisStats {
    pub mean: f64,
    pub std: f64,
    pub rms: f64,
}

impl AxisStats {
    fn of(v: &[f64]) -> Self {
        if v.is_empty() {
            return Self::default();
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let rms = (v.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
        Self { mean, std: var.sqrt(), rms }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSummary {
    pub loss: String,
    /// `false` for losses that are constant in θ under this configuration.
    pub identifiable: bool,
    /// Windows with both an estimate and ground truth.
    pub windows: usize,
    pub axes: [AxisStats; 3],
    /// RMS over all windows and components, in deg/s.
    pub rms_overall: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AngvelReport {
    pub windows: Vec<WindowEstimate>,
    pub summary: Vec<LossSummary>,
}

impl AngvelReport {
    pub fn summary_for(&self, loss: &str) -> Option<&LossSummary> {
        self.summary.iter().find(|s| s.loss == loss)
    }
}

/// Sequential angular-velocity estimation: each window is initialized
/// with the estimate of the previous one, the first with zero. Losses
/// run in parallel; output order follows `cfg.losses`.
pub fn run_angvel<T: Scalar>(events: &[Event], camera: &CameraGeometry, poses: Option<&PoseTrack>, cfg: &AngvelConfig) -> Result<AngvelReport> {
    if cfg.n_events == 0 {
        return Err(crate::Error::Config("window size must be at least one event".into()));
    }
    cfg.optim.validate()?;
    let windows = slice_by_count(events, cfg.n_events, cfg.n_events, cfg.ref_time);
    if windows.is_empty() && !events.is_empty() {
        log::warn!("{} events do not fill one window of {}", events.len(), cfg.n_events);
    }
    let warp = Warp::Rotation(camera.clone());
    let opts = IweOptions::new(camera.width, camera.height).with_polarity(cfg.polarity).with_splat(cfg.splat);
    opts.validate()?;

    let per_loss: Vec<(Vec<WindowEstimate>, Option<LossSummary>)> = cfg
        .losses
        .par_iter()
        .map(|spec| {
            let name = spec.name();
            if !cfg.polarity && spec.kind.degenerate_without_polarity() {
                let s = LossSummary { loss: name, identifiable: false, windows: 0, axes: Default::default(), rms_overall: f64::NAN };
                return (Vec::new(), (!windows.is_empty()).then_some(s));
            }
            let mut theta = vec![0.0; 3];
            let mut rows = Vec::with_capacity(windows.len());
            for (i, w) in windows.iter().enumerate() {
                let (t_start, t_end) = w.time_span().unwrap_or_default();
                let t_mid = 0.5 * (t_start + t_end);
                let obj = FocusObjective::<T>::new(w, &warp, *spec, opts);
                let (estimate, iterations, converged) = match maximize(&obj, &theta, &cfg.optim) {
                    Ok(r) => {
                        theta.clone_from(&r.theta);
                        (Some([r.theta[0], r.theta[1], r.theta[2]]), r.iterations, r.converged)
                    }
                    Err(e) => {
                        log::warn!("{name}: window {i} failed: {e}");
                        (None, 0, false)
                    }
                };
                let truth = poses.and_then(|p| p.angular_velocity(t_mid).ok());
                let error_dps = estimate.zip(truth).map(|(e, g)| std::array::from_fn(|k| (e[k] - g[k]).to_degrees()));
                rows.push(WindowEstimate { loss: name.clone(), window: i, t_start, t_end, t_mid, estimate, truth, error_dps, iterations, converged });
            }
            let summary = (!rows.is_empty()).then(|| summarize(&name, &rows));
            (rows, summary)
        })
        .collect();

    let mut report = AngvelReport::default();
    for (rows, summary) in per_loss {
        report.windows.extend(rows);
        report.summary.extend(summary);
    }
    Ok(report)
}

fn summarize(name: &str, rows: &[WindowEstimate]) -> LossSummary {
    let errs: Vec<[f64; 3]> = rows.iter().filter_map(|r| r.error_dps).collect();
    let axes = std::array::from_fn(|k| AxisStats::of(&errs.iter().map(|e| e[k]).collect::<Vec<_>>()));
    let rms_overall = if errs.is_empty() { f64::NAN } else { (errs.iter().flatten().map(|x| x * x).sum::<f64>() / (3 * errs.len()) as f64).sqrt() };
    LossSummary { loss: name.to_string(), identifiable: true, windows: errs.len(), axes, rms_overall }
}

/// `errors.csv` and `summary.csv` under `dir`. Non-identifiable losses
/// get a summary row of `-`.
pub fn write_angvel_csv(report: &AngvelReport, dir: &Path) -> Result<()> {
    let path = dir.join("errors.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "loss",
        "window",
        "t_start",
        "t_end",
        "t_mid",
        "wx",
        "wy",
        "wz",
        "gt_wx",
        "gt_wy",
        "gt_wz",
        "err_x_dps",
        "err_y_dps",
        "err_z_dps",
        "iterations",
        "converged",
    ])?;
    for r in &report.windows {
        let mut rec = vec![r.loss.clone(), r.window.to_string(), fmt_sig(r.t_start), fmt_sig(r.t_end), fmt_sig(r.t_mid)];
        for v in [r.estimate, r.truth, r.error_dps] {
            rec.extend((0..3).map(|k| opt_sig(v.map(|a| a[k]))));
        }
        rec.push(r.iterations.to_string());
        rec.push(r.converged.to_string());
        w.write_record(&rec)?;
    }
    finish(w, &path)?;

    let path = dir.join("summary.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["loss", "windows", "mean_x", "std_x", "rms_x", "mean_y", "std_y", "rms_y", "mean_z", "std_z", "rms_z", "rms_overall"])?;
    for s in &report.summary {
        let mut rec = vec![s.loss.clone()];
        if !s.identifiable {
            rec.extend(std::iter::repeat_n("-".to_string(), 11));
        } else if s.windows == 0 {
            rec.push("0".into());
            rec.extend(std::iter::repeat_n(String::new(), 10));
        } else {
            rec.push(s.windows.to_string());
            for a in &s.axes {
                rec.extend([fmt_sig(a.mean), fmt_sig(a.std), fmt_sig(a.rms)]);
            }
            rec.push(fmt_sig(s.rms_overall));
        }
        w.write_record(&rec)?;
    }
    finish(w, &path)
}
