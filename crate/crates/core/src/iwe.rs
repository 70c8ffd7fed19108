//! Image of warped events and its parameter derivatives.

use rayon::prelude::*;

use crate::error::IweError;
use crate::event::{EventWindow, Polarity};
use crate::image::ImageGrid;
use crate::scalar::Scalar;
use crate::warp::{Warp, MAX_DIM};

/// How a warped event is deposited on the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Splat {
    /// Separable truncated Gaussian of width `epsilon`, renormalized to unit
    /// mass over `|d| < radius` per axis. The truncation is C1: the tail is
    /// shifted and tilted so both the value and the slope vanish at the
    /// radius.
    Gaussian { epsilon: f64, radius: usize },
    /// Bilinear voting; value only.
    Bilinear,
}

impl Default for Splat {
    fn default() -> Self {
        Splat::Gaussian { epsilon: 1.0, radius: 3 }
    }
}

impl Splat {
    fn reach(&self) -> f64 {
        match *self {
            Splat::Gaussian { radius, .. } => radius as f64,
            Splat::Bilinear => 1.0,
        }
    }
}

/// Accumulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IweOptions {
    pub width: usize,
    pub height: usize,
    /// Weight events by polarity (`b_k = ±1`) instead of `b_k = 1`.
    pub use_polarity: bool,
    pub splat: Splat,
    /// Keep only events of this polarity.
    pub only: Option<Polarity>,
}

impl IweOptions {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, use_polarity: false, splat: Splat::default(), only: None }
    }

    pub fn with_polarity(mut self, on: bool) -> Self {
        self.use_polarity = on;
        self
    }

    pub fn with_splat(mut self, splat: Splat) -> Self {
        self.splat = splat;
        self
    }

    pub fn only(mut self, polarity: Option<Polarity>) -> Self {
        self.only = polarity;
        self
    }

    pub fn validate(&self) -> Result<(), IweError> {
        if self.width == 0 || self.height == 0 {
            return Err(IweError::Options("image size must be positive".into()));
        }
        if let Splat::Gaussian { epsilon, radius } = self.splat {
            if !(epsilon > 0.0) {
                return Err(IweError::Options(format!("epsilon must be positive, got {epsilon}")));
            }
            if (radius as f64) < (2.0 * epsilon).ceil() {
                return Err(IweError::Options(format!("radius {radius} below ceil(2 epsilon)")));
            }
        }
        Ok(())
    }

    /// Whether a warped position deposits any mass.
    #[inline]
    pub fn in_bounds(&self, p: [f64; 2]) -> bool {
        let r = self.splat.reach();
        p[0] > -r && p[1] > -r && p[0] < self.width as f64 - 1.0 + r && p[1] < self.height as f64 - 1.0 + r
    }
}

/// Accumulated image with the number of events that landed.
#[derive(Debug, Clone, PartialEq)]
pub struct Iwe<T> {
    pub image: ImageGrid<T>,
    pub retained: usize,
}

/// Accumulated image with one derivative image per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct IweWithGradient<T> {
    pub image: ImageGrid<T>,
    pub grads: Vec<ImageGrid<T>>,
    pub retained: usize,
}

/// Per-pixel mean timestamp (relative to the window start) and hit count.
#[derive(Debug, Clone, PartialEq)]
pub struct TimestampImage<T> {
    pub mean_t: ImageGrid<T>,
    pub count: ImageGrid<T>,
}

const MAX_TAPS: usize = 16;

/// Per-axis splat weights starting at pixel `start`.
struct Taps {
    start: isize,
    len: usize,
    w: [f64; MAX_TAPS],
    dw: [f64; MAX_TAPS],
}

/// Renormalized C1-truncated Gaussian taps along one axis and their
/// derivatives with respect to the center `c`.
#[inline]
fn gaussian_taps(c: f64, eps: f64, radius: usize, with_grad: bool) -> Taps {
    let r = radius as f64;
    let inv2 = 1.0 / (eps * eps);
    let g_r = (-0.5 * r * r * inv2).exp();
    let start = (c - r).floor() as isize + 1;
    let stop = (c + r).ceil() as isize - 1;
    let len = (stop - start + 1).clamp(0, MAX_TAPS as isize) as usize;
    let mut t = Taps { start, len, w: [0.0; MAX_TAPS], dw: [0.0; MAX_TAPS] };
    let (mut s, mut ds) = (0.0, 0.0);
    for i in 0..len {
        let u = (start + i as isize) as f64 - c;
        let g = (-0.5 * u * u * inv2).exp();
        let k = g - g_r * (1.0 + 0.5 * (r * r - u * u) * inv2);
        t.w[i] = k;
        s += k;
        if with_grad {
            let dk = u * inv2 * (g - g_r);
            t.dw[i] = dk;
            ds += dk;
        }
    }
    let inv_s = 1.0 / s;
    for i in 0..len {
        t.w[i] *= inv_s;
        if with_grad {
            t.dw[i] = (t.dw[i] - t.w[i] * ds) * inv_s;
        }
    }
    t
}

#[inline]
fn bilinear_taps(c: f64) -> Taps {
    let f = c.floor();
    let a = c - f;
    let mut t = Taps { start: f as isize, len: 2, w: [0.0; MAX_TAPS], dw: [0.0; MAX_TAPS] };
    t.w[0] = 1.0 - a;
    t.w[1] = a;
    t
}

struct Accum<T> {
    image: Vec<T>,
    grads: Vec<Vec<T>>,
    retained: usize,
}

impl<T: Scalar> Accum<T> {
    fn new(n: usize, m: usize) -> Self {
        Self { image: vec![T::zero(); n], grads: vec![vec![T::zero(); n]; m], retained: 0 }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.image.iter_mut().zip(&other.image) {
            *a += *b;
        }
        for (ga, gb) in self.grads.iter_mut().zip(&other.grads) {
            for (a, b) in ga.iter_mut().zip(gb) {
                *a += *b;
            }
        }
        self.retained += other.retained;
        self
    }
}

const CHUNK: usize = 8192;

fn accumulate<T: Scalar>(window: &EventWindow, warp: &Warp, theta: &[f64], opts: &IweOptions, with_grad: bool) -> Result<Accum<T>, IweError> {
    opts.validate()?;
    warp.check_dim(theta)?;
    if with_grad && opts.splat == Splat::Bilinear {
        return Err(IweError::BilinearGradient);
    }
    let m = if with_grad { warp.dim() } else { 0 };
    let (w, h) = (opts.width, opts.height);
    let run = |events: &[crate::event::Event]| {
        let mut acc = Accum::<T>::new(w * h, m);
        for e in events {
            if opts.only.is_some_and(|p| p != e.polarity) {
                continue;
            }
            let we = warp.apply(e, window.t_ref, theta, with_grad);
            if !we.valid || !opts.in_bounds(we.point) {
                continue;
            }
            acc.retained += 1;
            let b = if opts.use_polarity { e.polarity.sign() } else { 1.0 };
            let (tx, ty) = match opts.splat {
                Splat::Gaussian { epsilon, radius } => {
                    (gaussian_taps(we.point[0], epsilon, radius, with_grad), gaussian_taps(we.point[1], epsilon, radius, with_grad))
                }
                Splat::Bilinear => (bilinear_taps(we.point[0]), bilinear_taps(we.point[1])),
            };
            let jac = we.jacobian.unwrap_or([[0.0; 2]; MAX_DIM]);
            for j in 0..ty.len {
                let py = ty.start + j as isize;
                if py < 0 || py >= h as isize {
                    continue;
                }
                let row = py as usize * w;
                for i in 0..tx.len {
                    let px = tx.start + i as isize;
                    if px < 0 || px >= w as isize {
                        continue;
                    }
                    let idx = row + px as usize;
                    acc.image[idx] += T::lit(b * tx.w[i] * ty.w[j]);
                    if with_grad {
                        let gx = b * tx.dw[i] * ty.w[j];
                        let gy = b * tx.w[i] * ty.dw[j];
                        for (k, g) in acc.grads.iter_mut().enumerate() {
                            g[idx] += T::lit(gx * jac[k][0] + gy * jac[k][1]);
                        }
                    }
                }
            }
        }
        acc
    };
    let events = &window.events;
    if events.len() <= CHUNK || rayon::current_num_threads() <= 1 {
        return Ok(run(events));
    }
    let parts: Vec<Accum<T>> = events.par_chunks(CHUNK).map(run).collect();
    Ok(parts.into_iter().reduce(Accum::merge).unwrap_or_else(|| Accum::new(w * h, m)))
}

/// `I(x) = Σ_k b_k N(x − x'_k)`.
pub fn accumulate_iwe<T: Scalar>(window: &EventWindow, warp: &Warp, theta: &[f64], opts: &IweOptions) -> Result<Iwe<T>, IweError> {
    let acc = accumulate::<T>(window, warp, theta, opts, false)?;
    Ok(Iwe { image: ImageGrid::from_vec(opts.width, opts.height, acc.image), retained: acc.retained })
}

/// IWE together with `∂I/∂θ_j = −Σ_k b_k ∇N(x − x'_k) · ∂x'_k/∂θ_j`.
pub fn accumulate_iwe_with_gradient<T: Scalar>(
    window: &EventWindow,
    warp: &Warp,
    theta: &[f64],
    opts: &IweOptions,
) -> Result<IweWithGradient<T>, IweError> {
    let acc = accumulate::<T>(window, warp, theta, opts, true)?;
    Ok(IweWithGradient {
        image: ImageGrid::from_vec(opts.width, opts.height, acc.image),
        grads: acc.grads.into_iter().map(|g| ImageGrid::from_vec(opts.width, opts.height, g)).collect(),
        retained: acc.retained,
    })
}

/// Nearest-pixel binning of warped timestamps, re-zeroed at the first event.
pub fn timestamp_image<T: Scalar>(window: &EventWindow, warp: &Warp, theta: &[f64], opts: &IweOptions) -> Result<TimestampImage<T>, IweError> {
    opts.validate()?;
    warp.check_dim(theta)?;
    let (w, h) = (opts.width, opts.height);
    let t0 = window.events.first().map_or(0.0, |e| e.t);
    let mut sum = vec![0.0f64; w * h];
    let mut count = vec![0usize; w * h];
    for e in &window.events {
        if opts.only.is_some_and(|p| p != e.polarity) {
            continue;
        }
        let we = warp.apply(e, window.t_ref, theta, false);
        if !we.valid {
            continue;
        }
        let (px, py) = (we.point[0].round(), we.point[1].round());
        if px < 0.0 || py < 0.0 || px >= w as f64 || py >= h as f64 {
            continue;
        }
        let idx = py as usize * w + px as usize;
        sum[idx] += e.t - t0;
        count[idx] += 1;
    }
    let mean: Vec<T> = sum.iter().zip(&count).map(|(&s, &c)| if c == 0 { T::zero() } else { T::lit(s / c as f64) }).collect();
    Ok(TimestampImage {
        mean_t: ImageGrid::from_vec(w, h, mean),
        count: ImageGrid::from_vec(w, h, count.into_iter().map(T::from_usize_lossy).collect()),
    })
}

/// One-dimensional profile of the splat kernel centered at `c` over
/// pixels `0..n`.
pub fn splat_profile_1d(c: f64, n: usize, splat: Splat) -> Vec<f64> {
    let t = match splat {
        Splat::Gaussian { epsilon, radius } => gaussian_taps(c, epsilon, radius, false),
        Splat::Bilinear => bilinear_taps(c),
    };
    let mut out = vec![0.0; n];
    for i in 0..t.len {
        let p = t.start + i as isize;
        if p >= 0 && (p as usize) < n {
            out[p as usize] += t.w[i];
        }
    }
    out
}
