use std::fs;
use std::path::Path;

use evfocus::event::{
    load_calibration, load_events, load_poses, save_calibration, save_events, save_poses, CameraGeometry, Event, EventWindow, RefTime,
};
use evfocus::loss::{LossParams, LossSpec};
use evfocus::optim::DepthSpacing;
use evfocus::pipeline::{
    crop_patch, fmt_sig, parse_loss_list, run_angvel, run_bench, run_depth, run_flow_surface, run_gradcheck, write_angvel_csv, write_bench_csv,
    write_focal_curves_csv, write_gradcheck_csv, write_surface_csv, AngvelConfig, BenchConfig, DepthConfig, GradcheckConfig, GradcheckStatus,
    PatchSpec,
};
use evfocus::synth::{flow_patch_scene, gen_events, plane_scene, rotation_scene, Noise};
use evfocus::{DataError, Error, IweError, LossError, OptimError};

use crate::args::{
    AngvelArgs, BenchArgs, Command, DepthArgs, FlowArgs, GradcheckArgs, LossArgs, Precision, SceneKind, SensorArgs, Spacing, SynthArgs,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0} gradient checks failed")]
    GradcheckFailed(usize),
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<LossError> for CliError {
    fn from(e: LossError) -> Self {
        CliError::Core(e.into())
    }
}

fn loss_is_usage(e: &LossError) -> bool {
    matches!(e, LossError::UnknownName(_) | LossError::Parameter(_))
}

impl CliError {
    /// 1 usage or configuration, 2 data, 3 failed gradient checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::GradcheckFailed(_) => 3,
            CliError::Core(e) => match e {
                Error::Config(_) | Error::Iwe(_) => 1,
                Error::Loss(l) | Error::Optim(OptimError::Loss(l)) if loss_is_usage(l) => 1,
                Error::Optim(OptimError::Config(_) | OptimError::Iwe(IweError::Options(_) | IweError::Dimension { .. })) => 1,
                _ => 2,
            },
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Angvel(a) => angvel(a),
        Command::FlowSurface(a) => flow_surface(a),
        Command::Depth(a) => depth(a),
        Command::Gradcheck(a) => gradcheck(a),
        Command::Bench(a) => bench(a),
        Command::Synth(a) => synth(a),
    }
}

fn loss_specs(args: &LossArgs) -> Result<Vec<LossSpec>> {
    let params = LossParams {
        bins: args.bins,
        sigma_bins: args.sigma_bins,
        sigma_local: args.sigma_local,
        sign_smoothing: args.sign_smoothing,
        ..LossParams::default()
    };
    params.validate()?;
    Ok(parse_loss_list(&args.loss)?.into_iter().map(|k| LossSpec::with_params(k, params)).collect())
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Output { path: path.to_owned(), source }.into())
}

/// Intrinsics from `--calib`, or an ideal pinhole when `required` is false.
fn camera(sensor: &SensorArgs, required: bool) -> Result<CameraGeometry> {
    match &sensor.calib {
        Some(path) => Ok(load_calibration(path, sensor.width, sensor.height)?),
        None if required => Err(CliError::Usage("--calib is required".into())),
        None => Ok(CameraGeometry::pinhole(sensor.width, sensor.height, sensor.width as f64)),
    }
}

fn events(path: &Path, cam: &CameraGeometry) -> Result<Vec<Event>> {
    let loaded = load_events(path, cam)?;
    log::info!("{}: {} events", path.display(), loaded.events.len());
    Ok(loaded.events)
}

fn angvel(a: AngvelArgs) -> Result<()> {
    let cam = camera(&a.sensor, true)?;
    let events = events(&a.events, &cam)?;
    let poses = a.poses.as_deref().map(load_poses).transpose()?;
    if poses.is_none() {
        log::warn!("no ground-truth poses; error columns stay empty");
    }
    let mut cfg = AngvelConfig::new(loss_specs(&a.loss)?, a.n_events);
    cfg.polarity = a.loss.polarity.is_on();
    cfg.optim.max_iterations = a.max_iterations;
    let report = match a.loss.precision {
        Precision::F32 => run_angvel::<f32>(&events, &cam, poses.as_ref(), &cfg),
        Precision::F64 => run_angvel::<f64>(&events, &cam, poses.as_ref(), &cfg),
    }?;
    out_dir(&a.out)?;
    write_angvel_csv(&report, &a.out)?;
    for s in &report.summary {
        if !s.identifiable {
            log::info!("{}: not identifiable without polarity", s.loss);
        } else if s.windows == 0 {
            log::info!("{}: no ground truth to compare against", s.loss);
        } else {
            log::info!("{}: {} windows, RMS {} deg/s", s.loss, s.windows, fmt_sig(s.rms_overall));
        }
    }
    Ok(())
}

fn flow_surface(a: FlowArgs) -> Result<()> {
    let cam = camera(&a.sensor, false)?;
    if a.x0 >= cam.width || a.y0 >= cam.height {
        return Err(CliError::Usage(format!("patch origin ({}, {}) lies outside the sensor", a.x0, a.y0)));
    }
    if a.steps == 0 || a.span.is_nan() || a.span <= 0.0 {
        return Err(CliError::Usage("the grid needs at least one step and a positive span".into()));
    }
    let patch = PatchSpec {
        x0: a.x0,
        y0: a.y0,
        width: a.patch_width.unwrap_or(cam.width - a.x0),
        height: a.patch_height.unwrap_or(cam.height - a.y0),
        t0: a.t0,
        t1: a.t1,
    };
    let mut window = crop_patch(&events(&a.events, &cam)?, &patch)?;
    if let Some(n) = a.n_events {
        window.events.truncate(n.max(1));
        window = EventWindow::new(window.events, RefTime::Mid);
    }
    log::info!("patch holds {} events", window.len());
    let specs = loss_specs(&a.loss)?;
    let (center, half) = ([a.center_vx, a.center_vy], [a.span, a.span]);
    let polarity = a.loss.polarity.is_on();
    let surfaces = match a.loss.precision {
        Precision::F32 => run_flow_surface::<f32>(&window, patch.width, patch.height, &specs, polarity, center, half, a.steps),
        Precision::F64 => run_flow_surface::<f64>(&window, patch.width, patch.height, &specs, polarity, center, half, a.steps),
    }?;
    out_dir(&a.out)?;
    for s in &surfaces {
        write_surface_csv(s, &a.out)?;
        let [vx, vy] = s.best();
        log::info!("{}: best flow ({}, {}) px/s", s.loss, fmt_sig(vx), fmt_sig(vy));
    }
    Ok(())
}

fn depth(a: DepthArgs) -> Result<()> {
    let cam = camera(&a.sensor, true)?;
    let mut events = events(&a.events, &cam)?;
    if let Some(n) = a.n_events {
        events.truncate(n);
    }
    let track = load_poses(&a.poses)?;
    let window = EventWindow::new(events, RefTime::Mid);
    let mut cfg = DepthConfig::new(loss_specs(&a.loss)?, a.z_min, a.z_max, a.steps);
    cfg.spacing = match a.spacing {
        Spacing::Linear => DepthSpacing::Linear,
        Spacing::Inverse => DepthSpacing::InverseDepth,
    };
    cfg.polarity = a.loss.polarity.is_on();
    cfg.keep_fraction = a.keep;
    cfg.min_events = a.min_events;
    cfg.median = a.median;
    let map = match a.loss.precision {
        Precision::F32 => run_depth::<f32>(&window, &cam, &track, &cfg),
        Precision::F64 => run_depth::<f64>(&window, &cam, &track, &cfg),
    }?;
    out_dir(&a.out)?;
    write_focal_curves_csv(&map, &a.out)?;
    for (name, c) in &map.curves {
        log::info!("{name}: focal-curve extremum at {} m", fmt_sig(map.depths[c.extremum]));
    }
    log::info!("{} valid pixels", map.valid_count());
    Ok(())
}

fn gradcheck(a: GradcheckArgs) -> Result<()> {
    let cfg = GradcheckConfig {
        losses: parse_loss_list(&a.loss)?,
        first_seed: a.seed,
        seeds: a.seeds,
        n_events: a.n_events,
        size: a.size,
        polarity: a.polarity.is_on(),
        rel_tol: a.rel_tol,
        abs_floor: a.abs_floor,
        h: a.h,
        corrupt: a.corrupt,
    };
    let rows = run_gradcheck(&cfg)?;
    out_dir(&a.out)?;
    write_gradcheck_csv(&rows, &a.out)?;
    let count = |s| rows.iter().filter(|r| r.status == s).count();
    let failed = count(GradcheckStatus::Fail);
    log::info!("{} pass, {failed} fail, {} fd-only", count(GradcheckStatus::Pass), count(GradcheckStatus::FdOnly));
    if failed > 0 {
        return Err(CliError::GradcheckFailed(failed));
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        n_events: a.n_events,
        width: a.width,
        height: a.height,
        repetitions: a.repetitions,
        losses: parse_loss_list(&a.loss)?,
        seed: a.seed,
    };
    let rows = run_bench(&cfg)?;
    out_dir(&a.out)?;
    write_bench_csv(&rows, &a.out)?;
    for r in &rows {
        log::info!("{}: {} us", r.name, fmt_sig(r.median_us));
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let cam = CameraGeometry::pinhole(a.width, a.height, a.focal);
    let noise = Noise { jitter_px: a.jitter_px, jitter_t: 0.0, outlier_fraction: a.outliers };
    let mut scene = match a.scene {
        SceneKind::Rotation => rotation_scene(&cam, a.omega, a.elements, a.duration, a.rate, noise, a.seed),
        SceneKind::Flow => flow_patch_scene(a.flow, a.width.min(a.height), a.duration, a.rate, a.seed),
        SceneKind::Plane => plane_scene(&cam, a.depth, a.baseline, a.duration, a.rate, a.seed),
    };
    scene.noise = noise;
    let s = gen_events(&scene, &cam, a.seed)?;
    out_dir(&a.out)?;
    save_events(&a.out.join("events.txt"), &s.window.events)?;
    save_calibration(&a.out.join("calib.txt"), &cam)?;
    if let Some(track) = &s.poses {
        save_poses(&a.out.join("groundtruth.txt"), track)?;
    }
    let path = a.out.join("truth.txt");
    let line = s.truth.iter().map(|&v| fmt_sig(v)).collect::<Vec<_>>().join(" ");
    fs::write(&path, format!("{line}\n")).map_err(|source| Error::Output { path, source })?;
    log::info!("{} events ({} outliers) written to {}", s.window.len(), s.outliers, a.out.display());
    Ok(())
}
