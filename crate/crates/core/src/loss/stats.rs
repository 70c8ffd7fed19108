//! Global dispersion statistics and the image area.

use super::{dot, Weight};
use crate::error::LossError;
use crate::image::ImageGrid;
use crate::scalar::{signum0, Scalar};

fn n_of<T: Scalar>(img: &ImageGrid<T>) -> T {
    T::from_usize_lossy(img.len())
}

#[inline]
fn sign_fn<T: Scalar>(x: T, smoothing: Option<f64>) -> T {
    match smoothing {
        Some(k) => (T::lit(k) * x).tanh(),
        None => signum0(x),
    }
}

pub(super) fn variance_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>]) -> (T, Vec<T>) {
    let n = n_of(img);
    let mu = img.mean();
    let centered = img.map(|v| v - mu);
    let value = centered.as_slice().iter().map(|&c| c * c).sum::<T>() / n;
    // Σ(I − μ) = 0, so the mean shift drops out of the derivative.
    let two_n = T::lit(2.0) / n;
    (value, grads.iter().map(|g| two_n * dot(&centered, g)).collect())
}

pub(super) fn mean_square_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>]) -> (T, Vec<T>) {
    let n = n_of(img);
    let value = img.as_slice().iter().map(|&v| v * v).sum::<T>() / n;
    let two_n = T::lit(2.0) / n;
    (value, grads.iter().map(|g| two_n * dot(img, g)).collect())
}

pub(super) fn mad_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>], smoothing: Option<f64>) -> (T, Vec<T>) {
    let n = n_of(img);
    let mu = img.mean();
    let value = img.as_slice().iter().map(|&v| (v - mu).abs()).sum::<T>() / n;
    let s = img.map(|v| sign_fn(v - mu, smoothing));
    let s_sum = s.sum();
    let grad = grads.iter().map(|g| (dot(&s, g) - s_sum * g.mean()) / n).collect();
    (value, grad)
}

pub(super) fn mav_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>], smoothing: Option<f64>) -> (T, Vec<T>) {
    let n = n_of(img);
    let value = img.as_slice().iter().map(|v| v.abs()).sum::<T>() / n;
    let s = img.map(|v| sign_fn(v, smoothing));
    (value, grads.iter().map(|g| dot(&s, g) / n).collect())
}

pub(super) fn area_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>], w: Weight) -> Result<(T, Vec<T>), LossError> {
    let lo = img.min();
    if lo < T::zero() {
        return Err(LossError::NegativeValues(lo.as_f64()));
    }
    let value = img.as_slice().iter().map(|&v| w.primitive(v)).sum();
    let rho = img.map(|v| w.density(v));
    Ok((value, grads.iter().map(|g| dot(&rho, g)).collect()))
}

/// `(1/N_p) Σ (I − μ)²`.
pub fn variance<T: Scalar>(img: &ImageGrid<T>) -> T {
    variance_d(img, &[]).0
}

/// `(1/N_p) Σ I²`.
pub fn mean_square<T: Scalar>(img: &ImageGrid<T>) -> T {
    mean_square_d(img, &[]).0
}

/// `(1/N_p) Σ |I − μ|`.
pub fn mad<T: Scalar>(img: &ImageGrid<T>) -> T {
    mad_d(img, &[], None).0
}

/// `(1/N_p) Σ |I|`.
pub fn mav<T: Scalar>(img: &ImageGrid<T>) -> T {
    mav_d(img, &[], None).0
}

/// `Σ (F(I) − F(0))` for a non-negative image.
pub fn area<T: Scalar>(img: &ImageGrid<T>, weight: Weight) -> Result<T, LossError> {
    Ok(area_d(img, &[], weight)?.0)
}
