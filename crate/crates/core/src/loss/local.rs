//! Aggregated local statistics under a Gaussian window.

use crate::filter::gaussian_blur;
use crate::image::ImageGrid;
use crate::scalar::{signum0, Scalar};

/// Which local statistic to aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    Variance,
    MeanSquare,
    Mad,
    Mav,
}

/// Per-pixel local statistic `S(x)`:
/// variance `(I²∗G) − (I∗G)²`, mean square `I²∗G`,
/// mean absolute deviation `|I − I∗G|∗G`, mean absolute value `|I|∗G`.
pub fn local_stat_map<T: Scalar>(img: &ImageGrid<T>, kind: LocalKind, sigma: f64) -> ImageGrid<T> {
    match kind {
        LocalKind::Variance => {
            let m = gaussian_blur(img, sigma);
            let m2 = gaussian_blur(&img.map(|v| v * v), sigma);
            m2.zip_map(&m, |a, b| a - b * b)
        }
        LocalKind::MeanSquare => gaussian_blur(&img.map(|v| v * v), sigma),
        LocalKind::Mad => {
            let m = gaussian_blur(img, sigma);
            gaussian_blur(&img.zip_map(&m, |a, b| (a - b).abs()), sigma)
        }
        LocalKind::Mav => gaussian_blur(&img.map(|v| v.abs()), sigma),
    }
}

/// Pixel mean of [`local_stat_map`].
pub fn local_stat<T: Scalar>(img: &ImageGrid<T>, kind: LocalKind, sigma: f64) -> T {
    local_stat_map(img, kind, sigma).mean()
}

pub(super) fn local_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>], kind: LocalKind, sigma: f64) -> (T, Vec<T>) {
    let value = local_stat(img, kind, sigma);
    if grads.is_empty() {
        return (value, Vec::new());
    }
    let two = T::lit(2.0);
    let blurred = matches!(kind, LocalKind::Variance | LocalKind::Mad).then(|| gaussian_blur(img, sigma));
    let out = grads
        .iter()
        .map(|g| {
            // Σ over pixels of a blur is linear, so blur the integrand's
            // derivative and take its mean.
            let d = match kind {
                LocalKind::Variance => {
                    let m = blurred.as_ref().unwrap();
                    let bg = gaussian_blur(g, sigma);
                    let a = gaussian_blur(&img.zip_map(g, |i, gi| two * i * gi), sigma);
                    a.zip_map(&m.zip_map(&bg, |x, y| x * y), |p, q| p - two * q)
                }
                LocalKind::MeanSquare => gaussian_blur(&img.zip_map(g, |i, gi| two * i * gi), sigma),
                LocalKind::Mad => {
                    let m = blurred.as_ref().unwrap();
                    let bg = gaussian_blur(g, sigma);
                    let s = img.zip_map(m, |i, mi| signum0(i - mi));
                    let inner = s.zip_map(&g.zip_map(&bg, |a, b| a - b), |x, y| x * y);
                    gaussian_blur(&inner, sigma)
                }
                LocalKind::Mav => gaussian_blur(&img.zip_map(g, |i, gi| signum0(i) * gi), sigma),
            };
            d.mean()
        })
        .collect();
    (value, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{default_radius, gaussian_kernel};
    use proptest::prelude::*;

    #[test]
    fn constant_image_has_no_local_dispersion() {
        let img = ImageGrid::filled(12, 10, 3.0f64);
        for kind in [LocalKind::Variance, LocalKind::Mad] {
            assert!(local_stat_map(&img, kind, 3.0).as_slice().iter().all(|v| v.abs() < 1e-12));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn local_variance_is_non_negative(v in prop::collection::vec(-3.0f64..3.0, 20 * 20)) {
            let img = ImageGrid::from_vec(20, 20, v);
            prop_assert!(local_stat_map(&img, LocalKind::Variance, 2.0).as_slice().iter().all(|&s| s >= -1e-9));
        }

        #[test]
        fn local_variance_matches_sliding_window(v in prop::collection::vec(0.0f64..4.0, 32 * 32)) {
            let img = ImageGrid::from_vec(32, 32, v);
            let sigma = 2.0;
            let r = default_radius(sigma);
            let k: Vec<f64> = gaussian_kernel(sigma, r);
            let map = local_stat_map(&img, LocalKind::Variance, sigma);
            for y in r..32 - r {
                for x in r..32 - r {
                    let (mut m, mut m2) = (0.0, 0.0);
                    for dy in 0..2 * r + 1 {
                        for dx in 0..2 * r + 1 {
                            let w = k[dx] * k[dy];
                            let val = img[(x + dx - r, y + dy - r)];
                            m += w * val;
                            m2 += w * val * val;
                        }
                    }
                    prop_assert!((map[(x, y)] - (m2 - m * m)).abs() < 1e-8);
                }
            }
        }
    }
}
