use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{csv_writer, finish, fmt_sig};
use crate::error::Result;
use crate::event::{CameraGeometry, EventWindow, RefTime};
use crate::iwe::IweOptions;
use crate::loss::{LossKind, LossSpec};
use crate::optim::{FocusObjective, GradientMode};
use crate::synth::{flow_patch_scene, gen_events, rotation_scene, Noise};
use crate::warp::Warp;

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckConfig {
    pub losses: Vec<LossKind>,
    /// Windows are seeded `first_seed..first_seed + seeds`.
    pub first_seed: u64,
    pub seeds: u64,
    /// Events per window.
    pub n_events: usize,
    /// Side of the square IWE.
    pub size: usize,
    pub polarity: bool,
    pub rel_tol: f64,
    pub abs_floor: f64,
    /// Central-difference step in parameter units.
    pub h: f64,
    /// Scale applied to the analytic gradient, to exercise the harness.
    pub corrupt: Option<f64>,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            losses: LossKind::all(),
            first_seed: 0,
            seeds: 10,
            n_events: 1000,
            size: 64,
            polarity: false,
            rel_tol: 1e-4,
            abs_floor: 1e-6,
            h: 1e-4,
            corrupt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradcheckStatus {
    Pass,
    Fail,
    /// No analytic gradient to check.
    FdOnly,
}

impl GradcheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GradcheckStatus::Pass => "pass",
            GradcheckStatus::Fail => "fail",
            GradcheckStatus::FdOnly => "fd-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckRow {
    pub loss: String,
    pub warp: &'static str,
    pub seed: u64,
    pub theta: Vec<f64>,
    /// `max_j |a_j − f_j| / max(|f_j|, abs_floor / rel_tol)`.
    pub max_rel_err: Option<f64>,
    pub status: GradcheckStatus,
}

/// Random window of exactly `n` events (if the scene yields that many)
/// and the point at which to compare gradients.
fn random_window(warp: &Warp, cfg: &GradcheckConfig, seed: u64) -> Result<(EventWindow, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cam = CameraGeometry::pinhole(cfg.size, cfg.size, cfg.size as f64 * 60.0 / 64.0);
    let (scene, theta) = match warp {
        Warp::Rotation(_) => {
            let omega: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
            let scene = rotation_scene(&cam, omega, 150, 0.05, 4.0 * cfg.n_events as f64 / 150.0 / 0.05, Noise::default(), seed);
            let theta: Vec<f64> = omega.iter().map(|w| w + rng.random_range(-0.5..0.5)).collect();
            (scene, theta)
        }
        _ => {
            let v = [rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0)];
            let scene = flow_patch_scene(v, cfg.size, 0.2, 2.0 * cfg.n_events as f64 / 30.0 / 0.2, seed);
            (scene, vec![v[0] + rng.random_range(-10.0..10.0), v[1] + rng.random_range(-10.0..10.0)])
        }
    };
    let s = gen_events(&scene, &cam, seed)?;
    let mut events = s.window.events;
    events.truncate(cfg.n_events);
    Ok((EventWindow::new(events, RefTime::Mid), theta))
}

fn check(spec: LossSpec, warp: &Warp, window: &EventWindow, theta: &[f64], cfg: &GradcheckConfig) -> Result<f64> {
    let opts = IweOptions::new(cfg.size, cfg.size).with_polarity(cfg.polarity);
    let analytic = FocusObjective::<f64>::new(window, warp, spec, opts).loss_eval(theta)?;
    let fd = FocusObjective::<f64>::new(window, warp, spec, opts).with_gradient_mode(GradientMode::FiniteDifference { h: cfg.h }).loss_eval(theta)?;
    let scale = cfg.corrupt.unwrap_or(1.0);
    let floor = cfg.abs_floor / cfg.rel_tol;
    let a = analytic.gradient.unwrap_or_default();
    let f = fd.gradient.unwrap_or_default();
    Ok(a.iter().zip(&f).map(|(a, f)| (scale * a - f).abs() / f.abs().max(floor)).fold(0.0, f64::max))
}

/// Analytic against central-difference gradients for every loss, both
/// warp families and every seed. Rows are ordered by loss, warp, seed.
pub fn run_gradcheck(cfg: &GradcheckConfig) -> Result<Vec<GradcheckRow>> {
    let cam = CameraGeometry::pinhole(cfg.size, cfg.size, cfg.size as f64 * 60.0 / 64.0);
    let warps = [Warp::Rotation(cam), Warp::Flow];
    let mut cases = Vec::new();
    for (wi, warp) in warps.iter().enumerate() {
        for seed in cfg.first_seed..cfg.first_seed + cfg.seeds {
            cases.push((wi, seed, random_window(warp, cfg, seed)?));
        }
    }
    let jobs: Vec<(LossKind, usize)> = cfg.losses.iter().flat_map(|&k| (0..cases.len()).map(move |c| (k, c))).collect();
    jobs.par_iter()
        .map(|&(kind, c)| {
            let (wi, seed, (window, theta)) = &cases[c];
            let warp = &warps[*wi];
            let spec = LossSpec::new(kind);
            let (max_rel_err, status) = if kind.has_analytic_gradient() {
                let err = check(spec, warp, window, theta, cfg)?;
                (Some(err), if err <= cfg.rel_tol { GradcheckStatus::Pass } else { GradcheckStatus::Fail })
            } else {
                (None, GradcheckStatus::FdOnly)
            };
            Ok(GradcheckRow { loss: spec.name(), warp: warp.name(), seed: *seed, theta: theta.clone(), max_rel_err, status })
        })
        .collect()
}

/// `gradcheck.csv` under `dir`.
pub fn write_gradcheck_csv(rows: &[GradcheckRow], dir: &Path) -> Result<()> {
    let path = dir.join("gradcheck.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["loss", "warp", "seed", "max_rel_err", "status"])?;
    for r in rows {
        w.write_record([
            r.loss.clone(),
            r.warp.to_string(),
            r.seed.to_string(),
            r.max_rel_err.map(fmt_sig).unwrap_or_default(),
            r.status.as_str().to_string(),
        ])?;
    }
    finish(w, &path)
}
