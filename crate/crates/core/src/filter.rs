//! Linear image operators: Gaussian smoothing and finite-difference stencils.
//!
//! Every operator here is linear, so applying it to a derivative image
//! `∂I/∂θ` gives the derivative of the filtered image.

use crate::image::ImageGrid;
use crate::scalar::Scalar;

/// Treatment of samples outside the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    Replicate,
    Zero,
}

/// Normalized 1-D Gaussian taps on `[-radius, radius]`.
pub fn gaussian_kernel<T: Scalar>(sigma: f64, radius: usize) -> Vec<T> {
    assert!(sigma > 0.0, "sigma must be positive");
    let taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = taps.iter().sum();
    taps.into_iter().map(|v| T::lit(v / s)).collect()
}

/// Default truncation radius `⌈3σ⌉`.
pub fn default_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil().max(1.0) as usize
}

#[inline]
fn fetch<T: Scalar>(img: &ImageGrid<T>, x: isize, y: isize, border: Border) -> T {
    match border {
        Border::Replicate => img.get_clamped(x, y),
        Border::Zero => {
            if x < 0 || y < 0 || x >= img.width() as isize || y >= img.height() as isize {
                T::zero()
            } else {
                img.get(x as usize, y as usize)
            }
        }
    }
}

/// Correlate rows then columns with the symmetric kernel `k`.
pub fn convolve_separable<T: Scalar>(img: &ImageGrid<T>, k: &[T], border: Border) -> ImageGrid<T> {
    let r = (k.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let mut tmp = ImageGrid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (i, &kv) in k.iter().enumerate() {
                acc += kv * fetch(img, x as isize + i as isize - r, y as isize, border);
            }
            tmp[(x, y)] = acc;
        }
    }
    let mut out = ImageGrid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (i, &kv) in k.iter().enumerate() {
                acc += kv * fetch(&tmp, x as isize, y as isize + i as isize - r, border);
            }
            out[(x, y)] = acc;
        }
    }
    out
}

/// Gaussian blur with radius `⌈3σ⌉` and edge replication.
pub fn gaussian_blur<T: Scalar>(img: &ImageGrid<T>, sigma: f64) -> ImageGrid<T> {
    convolve_separable(img, &gaussian_kernel::<T>(sigma, default_radius(sigma)), Border::Replicate)
}

fn stencil<T: Scalar>(img: &ImageGrid<T>, f: impl Fn(&dyn Fn(isize, isize) -> T) -> T) -> ImageGrid<T> {
    ImageGrid::from_fn(img.width(), img.height(), |x, y| {
        let at = |dx: isize, dy: isize| img.get_clamped(x as isize + dx, y as isize + dy);
        f(&at)
    })
}

/// Central difference along x.
pub fn diff_x<T: Scalar>(img: &ImageGrid<T>) -> ImageGrid<T> {
    let half = T::lit(0.5);
    stencil(img, |at| half * (at(1, 0) - at(-1, 0)))
}

/// Central difference along y.
pub fn diff_y<T: Scalar>(img: &ImageGrid<T>) -> ImageGrid<T> {
    let half = T::lit(0.5);
    stencil(img, |at| half * (at(0, 1) - at(0, -1)))
}

pub fn diff_xx<T: Scalar>(img: &ImageGrid<T>) -> ImageGrid<T> {
    let two = T::lit(2.0);
    stencil(img, |at| at(1, 0) - two * at(0, 0) + at(-1, 0))
}

pub fn diff_yy<T: Scalar>(img: &ImageGrid<T>) -> ImageGrid<T> {
    let two = T::lit(2.0);
    stencil(img, |at| at(0, 1) - two * at(0, 0) + at(0, -1))
}

/// Mixed derivative as `diff_y(diff_x(I))`.
pub fn diff_xy<T: Scalar>(img: &ImageGrid<T>) -> ImageGrid<T> {
    diff_y(&diff_x(img))
}

/// Five-point Laplacian.
pub fn laplacian<T: Scalar>(img: &ImageGrid<T>) -> ImageGrid<T> {
    let four = T::lit(4.0);
    stencil(img, |at| at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1) - four * at(0, 0))
}
