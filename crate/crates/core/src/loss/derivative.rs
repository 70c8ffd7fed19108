//! Losses built from spatial derivatives of the IWE.

use super::{dot, LossParams};
use crate::error::LossError;
use crate::filter::{diff_x, diff_xx, diff_xy, diff_y, diff_yy, gaussian_blur, laplacian};
use crate::image::ImageGrid;
use crate::scalar::Scalar;

/// Squared-magnitude derivative losses, summed over pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKind {
    /// `Σ I_x² + I_y²`
    Gradient,
    /// `Σ (I_xx + I_yy)²`
    Laplacian,
    /// `Σ I_xx² + I_yy² + 2 I_xy²`
    Hessian,
    /// `Σ (I∗G_σ1 − I∗G_σ2)²`
    DoG,
    /// DoG with `σ2 = ratio · σ1`
    LoG,
}

/// Pixel variance of a derivative field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositeKind {
    /// `ΔI`
    Laplacian,
    /// `‖∇I‖`
    GradientMagnitude,
    /// `‖∇I‖²`
    SquaredGradient,
}

fn check_size<T: Scalar>(img: &ImageGrid<T>) -> Result<(), LossError> {
    if img.width() < 3 || img.height() < 3 {
        Err(LossError::TooSmall)
    } else {
        Ok(())
    }
}

fn sum_sq<T: Scalar>(a: &ImageGrid<T>) -> T {
    dot(a, a)
}

/// The linear fields whose squares are summed, per kind, with their
/// multiplicities.
fn fields<T: Scalar>(img: &ImageGrid<T>, kind: DerivativeKind, p: &LossParams) -> Vec<(ImageGrid<T>, T)> {
    let one = T::one();
    match kind {
        DerivativeKind::Gradient => vec![(diff_x(img), one), (diff_y(img), one)],
        DerivativeKind::Laplacian => vec![(laplacian(img), one)],
        DerivativeKind::Hessian => vec![(diff_xx(img), one), (diff_yy(img), one), (diff_xy(img), T::lit(2.0))],
        DerivativeKind::DoG | DerivativeKind::LoG => {
            let s2 = if kind == DerivativeKind::DoG { p.sigma2 } else { p.log_ratio * p.sigma1 };
            let d = gaussian_blur(img, p.sigma1).zip_map(&gaussian_blur(img, s2), |a, b| a - b);
            vec![(d, one)]
        }
    }
}

pub(super) fn derivative_d<T: Scalar>(
    img: &ImageGrid<T>,
    grads: &[ImageGrid<T>],
    kind: DerivativeKind,
    p: &LossParams,
) -> Result<(T, Vec<T>), LossError> {
    check_size(img)?;
    let fi = fields(img, kind, p);
    let value = fi.iter().map(|(f, m)| *m * sum_sq(f)).sum();
    let two = T::lit(2.0);
    let out = grads
        .iter()
        .map(|g| {
            let fg = fields(g, kind, p);
            fi.iter().zip(&fg).map(|((a, m), (b, _))| two * *m * dot(a, b)).sum()
        })
        .collect();
    Ok((value, out))
}

fn variance_with<T: Scalar>(f: &ImageGrid<T>, df: &[ImageGrid<T>]) -> (T, Vec<T>) {
    let n = T::from_usize_lossy(f.len());
    let mu = f.mean();
    let c = f.map(|v| v - mu);
    let value = sum_sq(&c) / n;
    let two_n = T::lit(2.0) / n;
    (value, df.iter().map(|d| two_n * dot(&c, d)).collect())
}

pub(super) fn composite_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>], kind: CompositeKind) -> Result<(T, Vec<T>), LossError> {
    check_size(img)?;
    let two = T::lit(2.0);
    let (field, dfields): (ImageGrid<T>, Vec<ImageGrid<T>>) = match kind {
        CompositeKind::Laplacian => (laplacian(img), grads.iter().map(laplacian).collect()),
        CompositeKind::GradientMagnitude | CompositeKind::SquaredGradient => {
            let (ix, iy) = (diff_x(img), diff_y(img));
            let sq = ix.zip_map(&iy, |a, b| a * a + b * b);
            let squared = kind == CompositeKind::SquaredGradient;
            let field = if squared { sq.clone() } else { sq.map(|v| v.sqrt()) };
            let d = grads
                .iter()
                .map(|g| {
                    let inner = ix.zip_map(&diff_x(g), |a, b| a * b).zip_map(&iy.zip_map(&diff_y(g), |a, b| a * b), |p, q| p + q);
                    if squared {
                        inner.map(|v| two * v)
                    } else {
                        // d‖∇I‖ = (∇I · ∇G) / ‖∇I‖, taken as zero where ∇I = 0.
                        inner.zip_map(&field, |v, m| if m > T::zero() { v / m } else { T::zero() })
                    }
                })
                .collect();
            (field, d)
        }
    };
    Ok(variance_with(&field, &dfields))
}

/// Derivative-magnitude loss with widths from `σ1`, `σ2`; LoG uses
/// `σ2 = 1.6 σ1`.
pub fn derivative_loss<T: Scalar>(img: &ImageGrid<T>, kind: DerivativeKind, sigma1: f64, sigma2: f64) -> Result<T, LossError> {
    let p = LossParams { sigma1, sigma2, ..LossParams::default() };
    Ok(derivative_d(img, &[], kind, &p)?.0)
}

/// Pixel variance of a derivative field.
pub fn composite_loss<T: Scalar>(img: &ImageGrid<T>, kind: CompositeKind) -> Result<T, LossError> {
    Ok(composite_d(img, &[], kind)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::variance;
    use proptest::prelude::*;

    const ALL: [DerivativeKind; 5] =
        [DerivativeKind::Gradient, DerivativeKind::Laplacian, DerivativeKind::Hessian, DerivativeKind::DoG, DerivativeKind::LoG];

    #[test]
    fn constant_image_scores_zero() {
        let img = ImageGrid::filled(10, 8, 7.0f64);
        for k in ALL {
            assert!(derivative_loss(&img, k, 1.0, 3.0).unwrap().abs() < 1e-20, "{k:?}");
        }
        for k in [CompositeKind::Laplacian, CompositeKind::GradientMagnitude, CompositeKind::SquaredGradient] {
            assert_eq!(composite_loss(&img, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn ramp_has_unit_interior_gradient() {
        let (w, h) = (10usize, 6usize);
        let ramp = ImageGrid::from_fn(w, h, |x, _| x as f64);
        // Interior columns have I_x = 1; the replicated border columns have
        // I_x = 1/2.
        let interior = ((w - 2) * h) as f64;
        let border = (2 * h) as f64 * 0.25;
        assert!((derivative_loss(&ramp, DerivativeKind::Gradient, 1.0, 3.0).unwrap() - (interior + border)).abs() < 1e-12);
        let lap = laplacian(&ramp);
        for y in 0..h {
            for x in 1..w - 1 {
                assert_eq!(lap[(x, y)], 0.0);
            }
        }
        let gm = diff_x(&ramp).zip_map(&diff_y(&ramp), |a, b| (a * a + b * b).sqrt());
        assert!((1..w - 1).all(|x| (0..h).all(|y| gm[(x, y)] == 1.0)));
    }

    #[test]
    fn tiny_images_are_rejected() {
        let img = ImageGrid::<f64>::zeros(2, 5);
        assert_eq!(derivative_loss(&img, DerivativeKind::Gradient, 1.0, 3.0).unwrap_err(), LossError::TooSmall);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn hessian_dominates_half_laplacian(v in prop::collection::vec(-2.0f64..2.0, 32 * 32)) {
            let img = ImageGrid::from_vec(32, 32, v);
            let hess = derivative_loss(&img, DerivativeKind::Hessian, 1.0, 3.0).unwrap();
            let lap = derivative_loss(&img, DerivativeKind::Laplacian, 1.0, 3.0).unwrap();
            prop_assert!(hess >= lap / 2.0 - 1e-9);
        }

        #[test]
        fn var_of_sq_gradient_is_variance_of_field(v in prop::collection::vec(0.0f64..3.0, 20 * 17)) {
            let img = ImageGrid::from_vec(20, 17, v);
            let field = diff_x(&img).zip_map(&diff_y(&img), |a, b| a * a + b * b);
            let got = composite_loss(&img, CompositeKind::SquaredGradient).unwrap();
            prop_assert!((got - variance(&field)).abs() <= 1e-10 * got.abs().max(1.0));
        }
    }
}
