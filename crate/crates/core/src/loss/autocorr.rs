//! Spatial autocorrelation: Moran's I and Geary's C with Gaussian weights.
//!
//! The weight between pixels `i ≠ j` is `w̃(j − i)`, a Gaussian with its
//! center removed and rescaled: `w̃ = (G − G(0) δ) / (1 − G(0))`. Pairs
//! leaving the image carry no weight, so the convolution forms below equal
//! the double sums over all pixel pairs exactly.

use crate::error::LossError;
use crate::filter::{convolve_separable, default_radius, gaussian_kernel, Border};
use crate::image::ImageGrid;
use crate::scalar::Scalar;

/// One-dimensional Gaussian taps and the 2-D center weight `G(0)`.
pub fn moran_weight_kernel<T: Scalar>(sigma: f64) -> (Vec<T>, T) {
    let k: Vec<T> = gaussian_kernel(sigma, default_radius(sigma));
    let c = k[k.len() / 2];
    (k, c * c)
}

/// `x ∗ w̃` with zero extension.
fn conv_w<T: Scalar>(x: &ImageGrid<T>, k: &[T], g0: T) -> ImageGrid<T> {
    let gx = convolve_separable(x, k, Border::Zero);
    let inv = T::one() / (T::one() - g0);
    gx.zip_map(x, |a, b| (a - g0 * b) * inv)
}

struct Standardized<T> {
    z: ImageGrid<T>,
    zw: ImageGrid<T>,
    rows: ImageGrid<T>,
    total_w: T,
}

fn standardize<T: Scalar>(img: &ImageGrid<T>, sigma_m: f64) -> Result<Standardized<T>, LossError> {
    let mu = img.mean();
    let var = img.as_slice().iter().map(|&v| (v - mu) * (v - mu)).sum::<T>() / T::from_usize_lossy(img.len());
    if !(var > T::zero()) {
        return Err(LossError::ZeroVariance);
    }
    let sd = var.sqrt();
    let z = img.map(|v| (v - mu) / sd);
    let (k, g0) = moran_weight_kernel::<T>(sigma_m);
    let zw = conv_w(&z, &k, g0);
    let rows = conv_w(&ImageGrid::filled(img.width(), img.height(), T::one()), &k, g0);
    let total_w = rows.sum();
    Ok(Standardized { z, zw, rows, total_w })
}

/// Moran's I: `(1/W) Σ_ij w_ij z_i z_j` on the standardized image.
/// Negative values indicate dispersion (sharp edges).
pub fn moran_i<T: Scalar>(img: &ImageGrid<T>, sigma_m: f64) -> Result<T, LossError> {
    let s = standardize(img, sigma_m)?;
    Ok(super::dot(&s.z, &s.zw) / s.total_w)
}

/// Geary's C: `(N − 1) Σ_ij w_ij (z_i − z_j)² / (2 W N)` on the standardized
/// image. Values above one indicate dispersion.
pub fn geary_c<T: Scalar>(img: &ImageGrid<T>, sigma_m: f64) -> Result<T, LossError> {
    let s = standardize(img, sigma_m)?;
    let (k, g0) = moran_weight_kernel::<T>(sigma_m);
    let z2 = s.z.map(|v| v * v);
    let z2w = conv_w(&z2, &k, g0);
    let two = T::lit(2.0);
    let mut acc = T::zero();
    for i in 0..img.len() {
        let (zi, z2i) = (s.z.as_slice()[i], z2.as_slice()[i]);
        acc += z2i * s.rows.as_slice()[i] + z2w.as_slice()[i] - two * zi * s.zw.as_slice()[i];
    }
    let n = T::from_usize_lossy(img.len());
    Ok((n - T::one()) * acc / (two * s.total_w * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct O(N²) sums over all ordered pixel pairs.
    fn brute(img: &ImageGrid<f64>, sigma: f64) -> (f64, f64) {
        let (k, g0) = moran_weight_kernel::<f64>(sigma);
        let r = (k.len() / 2) as isize;
        let (w, h) = (img.width() as isize, img.height() as isize);
        let mu = img.mean();
        let z: Vec<f64> = img.as_slice().iter().map(|v| v - mu).collect();
        let n = z.len() as f64;
        let m2: f64 = z.iter().map(|v| v * v).sum();
        let (mut sw, mut num_i, mut num_c) = (0.0, 0.0, 0.0);
        for yi in 0..h {
            for xi in 0..w {
                for yj in 0..h {
                    for xj in 0..w {
                        let (dx, dy) = (xj - xi, yj - yi);
                        if (dx == 0 && dy == 0) || dx.abs() > r || dy.abs() > r {
                            continue;
                        }
                        let wij = k[(dx + r) as usize] * k[(dy + r) as usize] / (1.0 - g0);
                        let (a, b) = (z[(yi * w + xi) as usize], z[(yj * w + xj) as usize]);
                        sw += wij;
                        num_i += wij * a * b;
                        num_c += wij * (a - b) * (a - b);
                    }
                }
            }
        }
        (n / sw * num_i / m2, (n - 1.0) * num_c / (2.0 * sw * m2))
    }

    #[test]
    fn blocks_cluster_and_checkerboards_disperse() {
        let blocks = ImageGrid::from_fn(12, 12, |x, _| if x < 6 { 0.0 } else { 1.0 });
        let (bi, _) = brute(&blocks, 1.0);
        assert!(bi > 0.0);
        assert!(moran_i(&blocks, 1.0).unwrap() > 0.0);
        let checker = ImageGrid::from_fn(12, 12, |x, y| ((x + y) % 2) as f64);
        let (ci, cc) = brute(&checker, 1.0);
        assert!(ci < 0.0 && cc > 1.0);
        assert!(moran_i(&checker, 1.0).unwrap() < 0.0);
        assert!(geary_c(&checker, 1.0).unwrap() > 1.0);
    }

    #[test]
    fn constant_image_is_rejected() {
        let img = ImageGrid::filled(5, 5, 2.0f64);
        assert_eq!(moran_i(&img, 1.0).unwrap_err(), LossError::ZeroVariance);
        assert_eq!(geary_c(&img, 1.0).unwrap_err(), LossError::ZeroVariance);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn convolution_forms_equal_double_sums(v in prop::collection::vec(0.0f64..5.0, 16 * 16)) {
            let img = ImageGrid::from_vec(16, 16, v);
            let (bi, bc) = brute(&img, 1.0);
            prop_assert!((moran_i(&img, 1.0).unwrap() - bi).abs() < 1e-8);
            prop_assert!((geary_c(&img, 1.0).unwrap() - bc).abs() < 1e-8);
        }
    }
}
