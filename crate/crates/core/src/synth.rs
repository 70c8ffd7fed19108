//! Ground-truth synthetic events.
//!
//! Events are sampled along the exact point trajectories of a known motion
//! rather than from a simulated brightness signal: each pattern element
//! fires at uniformly random times and its polarity is its contrast sign.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::DataError;
use crate::event::{CameraGeometry, Event, EventWindow, Polarity, PoseSample, PoseTrack, Quaternion, RefTime};
use crate::image::ImageGrid;
use crate::iwe::{splat_profile_1d, Splat};
use crate::so3::{self, Vec3};
use crate::warp::{DepthWarp, Warp};

/// Rate of the generated pose track, in Hz.
pub const POSE_RATE: f64 = 200.0;

/// Geometry of one pattern element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Pixel position at `t = 0`.
    Point([f64; 2]),
    /// Segment between two pixel positions at `t = 0`.
    Segment([f64; 2], [f64; 2]),
    /// Unit bearing in the camera frame at `t = 0`; rotation scenes only.
    Direction([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub shape: Shape,
    pub contrast: Polarity,
}

/// True motion of the scene relative to the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    /// Constant body rate `ω` in rad/s; the camera-to-world rotation is
    /// `exp(t ω^)`.
    Rotation([f64; 3]),
    /// Constant image velocity in px/s.
    Flow([f64; 2]),
    /// Camera translating at `velocity` (m/s, world frame, no rotation) in
    /// front of the plane `Z = depth` of the `t = 0` camera.
    Translation { velocity: [f64; 3], depth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Noise {
    /// Standard deviation of pixel jitter.
    pub jitter_px: f64,
    /// Standard deviation of timestamp jitter, in seconds.
    pub jitter_t: f64,
    /// Fraction of the output that is uniform clutter, in `[0, 1)`.
    pub outlier_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub elements: Vec<Element>,
    pub motion: Motion,
    /// Seconds; events are sampled on `[0, duration]`.
    pub duration: f64,
    /// Events per element per second.
    pub rate: f64,
    pub noise: Noise,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: &str| Err(DataError::Scene(m.to_string()));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be positive");
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return bad("event rate must be non-negative");
        }
        let n = &self.noise;
        if !(n.jitter_px >= 0.0 && n.jitter_t >= 0.0) {
            return bad("jitter must be non-negative");
        }
        if !(0.0..1.0).contains(&n.outlier_fraction) {
            return bad("outlier fraction must lie in [0, 1)");
        }
        if let Motion::Translation { depth, .. } = self.motion {
            if !(depth > 0.0) {
                return bad("plane depth must be positive");
            }
        }
        let directions = self.elements.iter().any(|e| matches!(e.shape, Shape::Direction(_)));
        if directions && !matches!(self.motion, Motion::Rotation(_)) {
            return bad("bearing elements require a rotation scene");
        }
        Ok(())
    }

    /// Events per element before clipping, `round(rate · duration)`.
    pub fn events_per_element(&self) -> usize {
        (self.rate * self.duration).round() as usize
    }
}

/// Generated window with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticWindow {
    /// Time-sorted events, `t_ref` at the midpoint of their span.
    pub window: EventWindow,
    /// True warp parameters at `window.t_ref`.
    pub truth: Vec<f64>,
    /// Camera pose track sampled at [`POSE_RATE`]; absent for flow scenes.
    pub poses: Option<PoseTrack>,
    /// Number of clutter events in `window`.
    pub outliers: usize,
}

impl SyntheticWindow {
    /// Warp family matching the scene motion.
    pub fn warp(&self, camera: &CameraGeometry) -> Result<Warp, DataError> {
        match &self.poses {
            Some(track) if self.truth.len() == 1 => Ok(Warp::Depth(DepthWarp::new(camera.clone(), track.clone(), self.window.t_ref)?)),
            _ if self.truth.len() == 3 => Ok(Warp::Rotation(camera.clone())),
            _ => Ok(Warp::Flow),
        }
    }
}

fn pose_track(motion: &Motion, duration: f64) -> Result<Option<PoseTrack>, DataError> {
    let pose = |t: f64| match *motion {
        Motion::Rotation(w) => Some(PoseSample { t, rotation: Quaternion::from_rotation_vector(so3::scale(w, t)), translation: [0.0; 3] }),
        Motion::Translation { velocity, .. } => Some(PoseSample { t, rotation: Quaternion::IDENTITY, translation: so3::scale(velocity, t) }),
        Motion::Flow(_) => None,
    };
    let n = ((duration * POSE_RATE).ceil() as usize).max(1);
    let samples: Option<Vec<_>> = (0..=n).map(|i| pose((i as f64 / POSE_RATE).min(duration))).collect();
    samples.map(PoseTrack::new).transpose()
}

/// Image position of a fixed element point at time `t`; `None` if it is
/// behind the camera.
struct Projector<'a> {
    motion: Motion,
    camera: &'a CameraGeometry,
}

impl Projector<'_> {
    /// Scene anchor of a point seen at pixel `p` at `t = 0`.
    fn anchor(&self, p: [f64; 2]) -> Vec3 {
        let [xn, yn] = self.camera.undistort(p[0], p[1]);
        match self.motion {
            Motion::Translation { depth, .. } => [xn * depth, yn * depth, depth],
            _ => {
                let n = (xn * xn + yn * yn + 1.0).sqrt();
                [xn / n, yn / n, 1.0 / n]
            }
        }
    }

    fn project(&self, p0: [f64; 2], anchor: Vec3, t: f64) -> Option<[f64; 2]> {
        let q = match self.motion {
            Motion::Flow(v) => return Some([p0[0] + v[0] * t, p0[1] + v[1] * t]),
            // Camera-frame bearing is exp(t ω^)ᵀ P.
            Motion::Rotation(w) => so3::mat_vec(&so3::exp(so3::scale(w, -t)), anchor),
            Motion::Translation { velocity, .. } => so3::sub(anchor, so3::scale(velocity, t)),
        };
        (q[2] > 1e-9).then(|| self.camera.distort(q[0] / q[2], q[1] / q[2]))
    }
}

/// Sample the scene. Deterministic for a fixed seed.
pub fn gen_events(scene: &SceneSpec, camera: &CameraGeometry, seed: u64) -> Result<SyntheticWindow, DataError> {
    scene.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let proj = Projector { motion: scene.motion, camera };
    let jitter_px = Normal::new(0.0, scene.noise.jitter_px).map_err(|e| DataError::Scene(e.to_string()))?;
    let jitter_t = Normal::new(0.0, scene.noise.jitter_t).map_err(|e| DataError::Scene(e.to_string()))?;
    let d = scene.duration;
    let per_element = scene.events_per_element();

    let mut events = Vec::with_capacity(per_element * scene.elements.len());
    for el in &scene.elements {
        for _ in 0..per_element {
            let t = rng.random::<f64>() * d;
            let pos = match el.shape {
                Shape::Point(p) => proj.project(p, proj.anchor(p), t),
                Shape::Segment(a, b) => {
                    let s = rng.random::<f64>();
                    let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                    proj.project(p, proj.anchor(p), t)
                }
                Shape::Direction(dir) => proj.project([0.0; 2], so3::scale(dir, 1.0 / so3::norm(dir)), t),
            };
            let Some([x, y]) = pos else { continue };
            let (x, y) = (x + jitter_px.sample(&mut rng), y + jitter_px.sample(&mut rng));
            let te = (t + jitter_t.sample(&mut rng)).clamp(0.0, d);
            if camera.contains(x, y) {
                events.push(Event::new(te, x, y, el.contrast));
            }
        }
    }

    let f = scene.noise.outlier_fraction;
    let outliers = (f / (1.0 - f) * events.len() as f64).round() as usize;
    for _ in 0..outliers {
        let t = rng.random::<f64>() * d;
        let x = rng.random::<f64>() * camera.width as f64 - 0.5;
        let y = rng.random::<f64>() * camera.height as f64 - 0.5;
        let p = if rng.random::<bool>() { Polarity::Positive } else { Polarity::Negative };
        events.push(Event::new(t, x, y, p));
    }
    if events.is_empty() {
        return Err(DataError::EmptyScene);
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));

    let window = EventWindow::new(events, RefTime::Mid);
    let truth = match scene.motion {
        Motion::Rotation(w) => w.to_vec(),
        Motion::Flow(v) => v.to_vec(),
        Motion::Translation { velocity, depth } => vec![depth - velocity[2] * window.t_ref],
    };
    let poses = pose_track(&scene.motion, d)?;
    Ok(SyntheticWindow { window, truth, poses, outliers })
}

/// Two unit-mass splats `Δx` apart on a 1-D grid, as a one-row image.
///
/// The kernel is the default IWE splat, so the profile has mass 2 for
/// every `Δx` small enough to stay inside the grid.
pub fn gen_two_event_1d(dx: f64) -> ImageGrid<f64> {
    const N: usize = 41;
    let c = (N / 2) as f64;
    let a = splat_profile_1d(c - dx / 2.0, N, Splat::default());
    let b = splat_profile_1d(c + dx / 2.0, N, Splat::default());
    ImageGrid::from_vec(N, 1, a.iter().zip(&b).map(|(x, y)| x + y).collect())
}

fn random_polarity(rng: &mut ChaCha8Rng) -> Polarity {
    if rng.random::<bool>() {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

/// Random points and short segments with pixel positions in
/// `[lo, hi]` (per axis).
pub fn random_pattern(points: usize, segments: usize, lo: [f64; 2], hi: [f64; 2], seed: u64) -> Vec<Element> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = |rng: &mut ChaCha8Rng| [lo[0] + rng.random::<f64>() * (hi[0] - lo[0]), lo[1] + rng.random::<f64>() * (hi[1] - lo[1])];
    let mut out = Vec::with_capacity(points + segments);
    for _ in 0..points {
        let p = uniform(&mut rng);
        out.push(Element { shape: Shape::Point(p), contrast: random_polarity(&mut rng) });
    }
    let len = 0.25 * (hi[0] - lo[0]).min(hi[1] - lo[1]);
    for _ in 0..segments {
        let a = uniform(&mut rng);
        let ang = rng.random::<f64>() * std::f64::consts::PI;
        let b = [a[0] + len * ang.cos(), a[1] + len * ang.sin()];
        out.push(Element { shape: Shape::Segment(a, b), contrast: random_polarity(&mut rng) });
    }
    out
}

/// Bearings uniform on the spherical cap of half-angle `cap` around the
/// optical axis.
pub fn sphere_pattern(n: usize, cap: f64, seed: u64) -> Vec<Element> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zmin = cap.min(std::f64::consts::PI).cos();
    (0..n)
        .map(|_| {
            let z = zmin + rng.random::<f64>() * (1.0 - zmin);
            let phi = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
            let r = (1.0 - z * z).max(0.0).sqrt();
            Element { shape: Shape::Direction([r * phi.cos(), r * phi.sin(), z]), contrast: random_polarity(&mut rng) }
        })
        .collect()
}

/// A textured patch translating at `v` px/s that stays inside a
/// `size x size` image for the whole duration.
pub fn flow_patch_scene(v: [f64; 2], size: usize, duration: f64, rate: f64, seed: u64) -> SceneSpec {
    let s = size as f64;
    let margin = 4.0;
    let lo = [margin - (v[0] * duration).min(0.0), margin - (v[1] * duration).min(0.0)];
    let hi = [s - 1.0 - margin - (v[0] * duration).max(0.0), s - 1.0 - margin - (v[1] * duration).max(0.0)];
    SceneSpec { elements: random_pattern(24, 6, lo, hi, seed), motion: Motion::Flow(v), duration, rate, noise: Noise::default() }
}

/// Bearings filling the field of view of `camera` throughout a rotation
/// at `omega` for `duration`.
pub fn rotation_scene(camera: &CameraGeometry, omega: [f64; 3], elements: usize, duration: f64, rate: f64, noise: Noise, seed: u64) -> SceneSpec {
    let half_diag = (camera.width.max(camera.height) as f64 / 2.0).hypot(camera.height.min(camera.width) as f64 / 2.0);
    let fov = (half_diag / camera.fx.min(camera.fy)).atan();
    let cap = fov + so3::norm(omega) * duration + 0.05;
    SceneSpec { elements: sphere_pattern(elements, cap, seed), motion: Motion::Rotation(omega), duration, rate, noise }
}

/// Textured fronto-parallel plane at `depth`, seen by a camera sliding
/// sideways by `baseline` metres over `duration`.
pub fn plane_scene(camera: &CameraGeometry, depth: f64, baseline: f64, duration: f64, rate: f64, seed: u64) -> SceneSpec {
    let w = camera.width as f64;
    let h = camera.height as f64;
    let shift = camera.fx * baseline / depth;
    // The plane texture extends beyond the view so every pixel sees it.
    let elements =
        random_pattern((w * h / 40.0) as usize, (w * h / 400.0) as usize, [-shift.abs() * 0.5 - 4.0, -4.0], [w + shift.abs() + 4.0, h + 4.0], seed);
    SceneSpec { elements, motion: Motion::Translation { velocity: [baseline / duration, 0.0, 0.0], depth }, duration, rate, noise: Noise::default() }
}
