use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "evfocus", version, about = "Focus-loss experiments on event-camera data")]
pub struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sequential angular-velocity estimation with per-loss error tables.
    Angvel(AngvelArgs),
    /// Loss surfaces over a grid of patch optical flows.
    FlowSurface(FlowArgs),
    /// Plane-sweep focal curves and a semi-dense depth map.
    Depth(DepthArgs),
    /// Analytic gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Single-thread timing of warp+accumulate and every loss.
    Bench(BenchArgs),
    /// Write a synthetic dataset in the public text formats.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Spacing {
    Linear,
    #[default]
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    Rotation,
    Flow,
    Plane,
}

/// Loss selection and tunables shared by every subcommand that evaluates losses.
#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// Comma-separated loss names, or `all`.
    #[arg(long, default_value = "variance")]
    pub loss: String,
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    pub polarity: Switch,
    /// Histogram bins of entropy and range.
    #[arg(long, default_value_t = 200)]
    pub bins: usize,
    /// PDF smoothing of entropy and range, in bins.
    #[arg(long, default_value_t = 5.0)]
    pub sigma_bins: f64,
    /// Gaussian width of the local statistics, px.
    #[arg(long, default_value_t = 3.0)]
    pub sigma_local: f64,
    /// Replace sign(x) by tanh(kx) in the MAD/MAV gradients.
    #[arg(long)]
    pub sign_smoothing: Option<f64>,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

#[derive(Debug, Clone, Args)]
pub struct SensorArgs {
    /// Camera intrinsics file (`fx fy cx cy k1 k2 p1 p2 k3`).
    #[arg(long)]
    pub calib: Option<PathBuf>,
    #[arg(long, default_value_t = 240)]
    pub width: usize,
    #[arg(long, default_value_t = 180)]
    pub height: usize,
}

#[derive(Debug, Args)]
pub struct AngvelArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[command(flatten)]
    pub sensor: SensorArgs,
    /// Ground-truth poses (`t tx ty tz qx qy qz qw`); errors are left empty without it.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long, default_value_t = 30_000)]
    pub n_events: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[command(flatten)]
    pub sensor: SensorArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Patch origin and size in pixels; the size defaults to the rest of the sensor.
    #[arg(long, default_value_t = 0)]
    pub x0: usize,
    #[arg(long, default_value_t = 0)]
    pub y0: usize,
    #[arg(long)]
    pub patch_width: Option<usize>,
    #[arg(long)]
    pub patch_height: Option<usize>,
    /// Patch time span `[t0, t1)` in seconds.
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    /// Keep at most this many events of the patch, from its start.
    #[arg(long)]
    pub n_events: Option<usize>,
    /// Grid cells per axis.
    #[arg(long, default_value_t = 41)]
    pub steps: usize,
    /// Half extent of the grid in px/s.
    #[arg(long, default_value_t = 60.0)]
    pub span: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center_vx: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center_vy: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[command(flatten)]
    pub sensor: SensorArgs,
    #[arg(long)]
    pub poses: PathBuf,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Use at most this many events from the start of the stream.
    #[arg(long)]
    pub n_events: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub z_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Inverse)]
    pub spacing: Spacing,
    /// Fraction of candidate pixels kept, ranked by confidence.
    #[arg(long, default_value_t = 0.3)]
    pub keep: f64,
    /// Minimum events in a pixel's 3x3 patch at its chosen depth.
    #[arg(long, default_value_t = 3.0)]
    pub min_events: f64,
    /// 3x3 median filter over valid depths.
    #[arg(long)]
    pub median: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value = "all")]
    pub loss: String,
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    pub polarity: Switch,
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1000)]
    pub n_events: usize,
    /// Side of the square IWE.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub abs_floor: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    /// Scale the analytic gradient before comparing, to exercise the check.
    #[arg(long, hide = true)]
    pub corrupt: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// First window seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "all")]
    pub loss: String,
    #[arg(long, default_value_t = 30_000)]
    pub n_events: usize,
    #[arg(long, default_value_t = 240)]
    pub width: usize,
    #[arg(long, default_value_t = 180)]
    pub height: usize,
    #[arg(long, default_value_t = 100)]
    pub repetitions: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = SceneKind::Rotation)]
    pub scene: SceneKind,
    #[arg(long, default_value_t = 240)]
    pub width: usize,
    #[arg(long, default_value_t = 180)]
    pub height: usize,
    /// Focal length in pixels.
    #[arg(long, default_value_t = 200.0)]
    pub focal: f64,
    /// Angular velocity `wx,wy,wz` in rad/s.
    #[arg(long, value_parser = vector::<3>, default_value = "0.5,-0.3,2", allow_hyphen_values = true)]
    pub omega: [f64; 3],
    /// Image velocity `vx,vy` in px/s.
    #[arg(long, value_parser = vector::<2>, default_value = "-40,0", allow_hyphen_values = true)]
    pub flow: [f64; 2],
    /// Plane depth in metres.
    #[arg(long, default_value_t = 1.1)]
    pub depth: f64,
    /// Sideways camera travel in metres.
    #[arg(long, default_value_t = 0.3)]
    pub baseline: f64,
    /// Pattern elements of the rotation scene.
    #[arg(long, default_value_t = 2000)]
    pub elements: usize,
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    /// Events per element per second.
    #[arg(long, default_value_t = 60.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub jitter_px: f64,
    #[arg(long, default_value_t = 0.0)]
    pub outliers: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses exactly `N` comma-separated numbers, so a leading minus stays part of one token.
fn vector<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>()?;
    parts.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}
