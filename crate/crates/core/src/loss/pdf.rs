//! Entropy and range of the pixel-value distribution.
//!
//! The histogram spans `[min I, max I]` with `bins` equal bins, padded on
//! both sides so smoothing loses no mass. Pixels are binned with the
//! quadratic B-spline, which makes every quantity below continuously
//! differentiable in the pixel values. The histogram is then smoothed with a
//! Gaussian of `sigma_bins` bins truncated at four widths.

use super::{dot, Weight};
use crate::error::LossError;
use crate::filter::gaussian_kernel;
use crate::image::ImageGrid;
use crate::scalar::Scalar;

#[inline]
fn spline<T: Scalar>(t: T) -> T {
    let a = t.abs();
    let (h, q) = (T::lit(0.5), T::lit(1.5));
    if a < h {
        T::lit(0.75) - t * t
    } else if a < q {
        h * (a - q) * (a - q)
    } else {
        T::zero()
    }
}

#[inline]
fn spline_deriv<T: Scalar>(t: T) -> T {
    let a = t.abs();
    let (h, q) = (T::lit(0.5), T::lit(1.5));
    if a < h {
        -T::lit(2.0) * t
    } else if a < q {
        if t > T::zero() {
            a - q
        } else {
            q - a
        }
    } else {
        T::zero()
    }
}

/// Smoothed distribution of pixel values.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedPdf<T> {
    pub zmin: T,
    pub zmax: T,
    /// Bin width `(zmax − zmin) / bins`.
    pub dz: T,
    pub bins: usize,
    /// Padding bins on each side.
    pub pad: usize,
    /// Bin probabilities; they sum to one.
    pub prob: Vec<T>,
    kernel: Vec<T>,
}

impl<T: Scalar> SmoothedPdf<T> {
    /// # Errors
    /// Constant images have no distribution.
    pub fn from_image(img: &ImageGrid<T>, bins: usize, sigma_bins: f64) -> Result<Self, LossError> {
        let (zmin, zmax) = (img.min(), img.max());
        if !(zmax > zmin) {
            return Err(LossError::DegenerateDistribution);
        }
        let radius = (4.0 * sigma_bins).ceil().max(1.0) as usize;
        let pad = radius + 2;
        let kernel = gaussian_kernel::<T>(sigma_bins, radius);
        let n_bins = bins + 2 * pad;
        let scale = T::from_usize_lossy(bins) / (zmax - zmin);
        let w = T::one() / T::from_usize_lossy(img.len());
        let mut hist = vec![T::zero(); n_bins];
        for &z in img.as_slice() {
            let u = (z - zmin) * scale;
            for (b, t) in Self::touched(u, pad, n_bins) {
                hist[b] += w * spline(t);
            }
        }
        let prob = convolve(&hist, &kernel);
        Ok(Self { zmin, zmax, dz: (zmax - zmin) / T::from_usize_lossy(bins), bins, pad, prob, kernel })
    }

    /// Bins whose spline touches position `u` (in bins from `zmin`), with
    /// the offset `u − center`.
    #[inline]
    fn touched(u: T, pad: usize, n_bins: usize) -> impl Iterator<Item = (usize, T)> {
        let k0 = (u + T::from_usize_lossy(pad)).floor().to_isize().unwrap_or(0);
        (k0 - 1..=k0 + 1).filter(move |&b| b >= 0 && (b as usize) < n_bins).map(move |b| {
            let c = T::from_isize(b).unwrap() + T::lit(0.5) - T::from_usize_lossy(pad);
            (b as usize, u - c)
        })
    }

    /// Probability density per bin; integrates to one with weight `dz`.
    pub fn density(&self) -> Vec<T> {
        self.prob.iter().map(|&p| p / self.dz).collect()
    }

    /// Bin edges in pixel-value units, `prob.len() + 1` entries.
    pub fn edges(&self) -> Vec<T> {
        (0..=self.prob.len()).map(|b| self.zmin + (T::from_usize_lossy(b) - T::from_usize_lossy(self.pad)) * self.dz).collect()
    }

    /// Central-difference samples of the density derivative `p'(z)`.
    pub fn derivative(&self) -> Vec<T> {
        let d = self.density();
        let n = d.len();
        let two_dz = T::lit(2.0) * self.dz;
        (0..n)
            .map(|b| {
                let lo = if b == 0 { T::zero() } else { d[b - 1] };
                let hi = if b + 1 == n { T::zero() } else { d[b + 1] };
                (hi - lo) / two_dz
            })
            .collect()
    }

    /// Pixel adjoint of a functional of the smoothed probabilities.
    ///
    /// `dl_dprob[b] = ∂L/∂prob_b` at fixed range and `dl_drange` is the
    /// explicit partial derivative with respect to `zmax − zmin`.
    fn backprop(&self, img: &ImageGrid<T>, dl_dprob: &[T], dl_drange: T) -> ImageGrid<T> {
        let a = convolve(dl_dprob, &self.kernel);
        let n_bins = self.prob.len();
        let range = self.zmax - self.zmin;
        let b_t = T::from_usize_lossy(self.bins);
        let scale = b_t / range;
        let w = T::one() / T::from_usize_lossy(img.len());
        let mut adj = img.map(|z| {
            let u = (z - self.zmin) * scale;
            let mut e = T::zero();
            for (b, t) in Self::touched(u, self.pad, n_bins) {
                e += a[b] * spline_deriv(t);
            }
            e * w * scale
        });
        // u_i = B (z_i − zmin) / D also moves with zmin and zmax.
        let (mut e_sum, mut eu_sum) = (T::zero(), T::zero());
        for (&e, &z) in adj.as_slice().iter().zip(img.as_slice()) {
            e_sum += e;
            eu_sum += e * (z - self.zmin) / range;
        }
        let (imin, imax) = arg_extrema(img);
        let s = adj.as_mut_slice();
        s[imin] += -e_sum + eu_sum - dl_drange;
        s[imax] += -eu_sum + dl_drange;
        adj
    }
}

/// First indices of the minimum and maximum.
fn arg_extrema<T: Scalar>(img: &ImageGrid<T>) -> (usize, usize) {
    let s = img.as_slice();
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in s.iter().enumerate() {
        if v < s[imin] {
            imin = i;
        }
        if v > s[imax] {
            imax = i;
        }
    }
    (imin, imax)
}

/// Same-size correlation with a symmetric kernel and zero extension.
fn convolve<T: Scalar>(x: &[T], k: &[T]) -> Vec<T> {
    let r = k.len() / 2;
    let n = x.len();
    (0..n)
        .map(|b| {
            let mut acc = T::zero();
            for (j, &kv) in k.iter().enumerate() {
                let idx = b as isize + j as isize - r as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += kv * x[idx as usize];
                }
            }
            acc
        })
        .collect()
}

pub(super) fn entropy_d<T: Scalar>(img: &ImageGrid<T>, grads: &[ImageGrid<T>], bins: usize, sigma_bins: f64) -> Result<(T, Vec<T>), LossError> {
    let pdf = SmoothedPdf::from_image(img, bins, sigma_bins)?;
    // H = −Σ p̃ log p̃ dz with p̃ = prob/dz, i.e. −Σ prob log prob + log dz.
    let mut h = T::zero();
    let mut dl = vec![T::zero(); pdf.prob.len()];
    for (b, &p) in pdf.prob.iter().enumerate() {
        if p > T::zero() {
            let lp = p.ln();
            h -= p * lp;
            dl[b] = -lp - T::one();
        }
    }
    let value = h + pdf.dz.ln();
    if grads.is_empty() {
        return Ok((value, Vec::new()));
    }
    let adj = pdf.backprop(img, &dl, T::one() / (pdf.zmax - pdf.zmin));
    Ok((value, grads.iter().map(|g| dot(&adj, g)).collect()))
}

pub(super) fn range_d<T: Scalar>(
    img: &ImageGrid<T>,
    grads: &[ImageGrid<T>],
    w: Weight,
    bins: usize,
    sigma_bins: f64,
) -> Result<(T, Vec<T>), LossError> {
    let pdf = SmoothedPdf::from_image(img, bins, sigma_bins)?;
    let dz = pdf.dz;
    let mut sum_f = T::zero();
    let mut sum_rho_p = T::zero();
    let mut dl = vec![T::zero(); pdf.prob.len()];
    for (b, &p) in pdf.prob.iter().enumerate() {
        let q = p / dz;
        let rho = w.density(q);
        sum_f += w.primitive(q);
        sum_rho_p += rho * q;
        dl[b] = rho;
    }
    let value = sum_f * dz;
    if grads.is_empty() {
        return Ok((value, Vec::new()));
    }
    let dl_drange = (sum_f - sum_rho_p) / T::from_usize_lossy(bins);
    let adj = pdf.backprop(img, &dl, dl_drange);
    Ok((value, grads.iter().map(|g| dot(&adj, g)).collect()))
}

/// Differential entropy `−Σ p log p dz` of the smoothed pixel-value density.
pub fn entropy<T: Scalar>(img: &ImageGrid<T>, bins: usize, sigma_bins: f64) -> Result<T, LossError> {
    Ok(entropy_d(img, &[], bins, sigma_bins)?.0)
}

/// Weighted support `Σ (F(p) − F(0)) dz` of the smoothed pixel-value density.
pub fn range_support<T: Scalar>(img: &ImageGrid<T>, weight: Weight, bins: usize, sigma_bins: f64) -> Result<T, LossError> {
    Ok(range_d(img, &[], weight, bins, sigma_bins)?.0)
}

/// Weighted support of a density sampled on bins of width `dz`.
pub fn range_of_density<T: Scalar>(density: &[T], dz: T, weight: Weight) -> T {
    density.iter().map(|&p| weight.primitive(p)).sum::<T>() * dz
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spline_is_partition_of_unity() {
        for u in [0.0f64, 0.2, 0.5, 3.7, 199.99] {
            let s: f64 = SmoothedPdf::<f64>::touched(u, 22, 244).map(|(_, t)| spline(t)).sum();
            assert!((s - 1.0).abs() < 1e-14, "{u}");
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let img = ImageGrid::from_fn(13, 11, |x, y| ((x * x + 3 * y) % 7) as f64 * 0.3);
        let pdf = SmoothedPdf::from_image(&img, 200, 5.0).unwrap();
        let integral: f64 = pdf.density().iter().map(|p| p * pdf.dz).sum();
        assert!((integral - 1.0).abs() < 1e-6);
        assert!(pdf.prob.iter().all(|&p| p >= 0.0));
        assert_eq!(pdf.edges().len(), pdf.prob.len() + 1);
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = ImageGrid::filled(4, 4, 1.0f64);
        assert_eq!(entropy(&img, 200, 5.0).unwrap_err(), LossError::DegenerateDistribution);
        assert!(range_support(&img, Weight::Exp, 200, 5.0).is_err());
    }

    #[test]
    fn two_spike_entropy() {
        // Half the pixels at 0, half at 1. A spike on a bin edge is split
        // evenly over two bins by the spline, adding ln 2 per spike; the two
        // spikes contribute another ln 2.
        let img = ImageGrid::from_fn(8, 8, |x, _| if x < 4 { 0.0 } else { 1.0 });
        let h = entropy(&img, 200, 1e-3).unwrap();
        let dz = 1.0f64 / 200.0;
        let expected = 2.0 * 2f64.ln() + dz.ln();
        assert!((h - expected).abs() < 1e-9, "{h} vs {expected}");
    }

    #[test]
    fn negation_preserves_entropy() {
        let img = ImageGrid::from_fn(9, 7, |x, y| ((x * 5 + y * 3) % 11) as f64 - 2.5);
        let neg = img.map(|v| -v);
        let (a, b) = (entropy(&img, 200, 5.0).unwrap(), entropy(&neg, 200, 5.0).unwrap());
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn uniform_density_has_larger_support_than_a_spike() {
        let k = 10;
        let dz = 0.1f64;
        let mut narrow = vec![0.0; 40];
        narrow[20] = 1.0 / dz;
        let mut wide = vec![0.0; 40];
        for v in &mut wide[15..15 + k] {
            *v = 1.0 / (k as f64 * dz);
        }
        for w in Weight::ALL {
            assert!(range_of_density(&wide, dz, w) > range_of_density(&narrow, dz, w), "{w:?}");
        }
    }

    proptest! {
        #[test]
        fn range_ignores_pixel_order(v in prop::collection::vec(0.0f64..5.0, 49), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            prop_assume!(v.iter().any(|&x| x != v[0]));
            let mut w = v.clone();
            w.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (a, b) = (ImageGrid::from_vec(7, 7, v), ImageGrid::from_vec(7, 7, w));
            let ra = range_support(&a, Weight::Exp, 200, 5.0).unwrap();
            let rb = range_support(&b, Weight::Exp, 200, 5.0).unwrap();
            prop_assert!((ra - rb).abs() < 1e-12);
        }

        #[test]
        fn pixel_adjoint_matches_finite_differences(v in prop::collection::vec(0.0f64..3.0, 36), pick in 0usize..36) {
            prop_assume!(v.iter().any(|&x| x != v[0]));
            let img = ImageGrid::from_vec(6, 6, v);
            let mut g = ImageGrid::zeros(6, 6);
            g.as_mut_slice()[pick] = 1.0;
            let h = 1e-6;
            let bump = |s: f64| img.zip_map(&g, |a, b| a + s * b);
            let (he, ge) = entropy_d(&img, std::slice::from_ref(&g), 200, 5.0).unwrap();
            let fd = (entropy(&bump(h), 200, 5.0).unwrap() - entropy(&bump(-h), 200, 5.0).unwrap()) / (2.0 * h);
            prop_assert!((ge[0] - fd).abs() < 1e-5 * fd.abs().max(1.0), "entropy {} vs {fd} (H={he})", ge[0]);
            let (_, gr) = range_d(&img, std::slice::from_ref(&g), Weight::Exp, 200, 5.0).unwrap();
            let fd = (range_support(&bump(h), Weight::Exp, 200, 5.0).unwrap() - range_support(&bump(-h), Weight::Exp, 200, 5.0).unwrap()) / (2.0 * h);
            prop_assert!((gr[0] - fd).abs() < 1e-5 * fd.abs().max(1.0), "range {} vs {fd}", gr[0]);
        }
    }
}
