//! Focus losses on the image of warped events.
//!
//! Each loss is a functional `L(I)`. Its parameter gradient is the
//! directional derivative `DL(I)[∂I/∂θ_j]`, computed on the same code path as
//! the value so both agree bit for bit.

mod autocorr;
mod derivative;
mod local;
mod pdf;
mod stats;
mod timestamp;

use std::fmt;
use std::str::FromStr;

pub use autocorr::{geary_c, moran_i, moran_weight_kernel};
pub use derivative::{composite_loss, derivative_loss, CompositeKind, DerivativeKind};
pub use local::{local_stat, local_stat_map, LocalKind};
pub use pdf::{entropy, range_of_density, range_support, SmoothedPdf};
pub use stats::{area, mad, mav, mean_square, variance};
pub use timestamp::mean_timestamp_loss;

use crate::error::LossError;
use crate::image::ImageGrid;
use crate::iwe::IweWithGradient;
use crate::scalar::Scalar;

/// Weighting `ρ` of the area and range losses, with primitive `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weight {
    Exp,
    Gaussian,
    Lorentzian,
    Hyperbolic,
}

impl Weight {
    pub const ALL: [Weight; 4] = [Weight::Exp, Weight::Gaussian, Weight::Lorentzian, Weight::Hyperbolic];

    /// Primitive `F(λ)` with `F(0) = 0`.
    #[inline]
    pub fn primitive<T: Scalar>(self, l: T) -> T {
        match self {
            Weight::Exp => T::one() - (-l).exp(),
            Weight::Gaussian => l.erf(),
            Weight::Lorentzian => T::FRAC_2_PI() * l.atan(),
            Weight::Hyperbolic => l.tanh(),
        }
    }

    /// `ρ(λ) = F'(λ)`.
    #[inline]
    pub fn density<T: Scalar>(self, l: T) -> T {
        match self {
            Weight::Exp => (-l).exp(),
            Weight::Gaussian => T::FRAC_2_SQRT_PI() * (-l * l).exp(),
            Weight::Lorentzian => T::FRAC_2_PI() / (T::one() + l * l),
            Weight::Hyperbolic => {
                let t = l.tanh();
                T::one() - t * t
            }
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Weight::Exp => "exp",
            Weight::Gaussian => "gaussian",
            Weight::Lorentzian => "lorentzian",
            Weight::Hyperbolic => "hyperbolic",
        }
    }
}

/// The 22 focus losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Variance,
    MeanSquare,
    Mad,
    Mav,
    Entropy,
    Area(Weight),
    Range(Weight),
    LocalVariance,
    LocalMs,
    LocalMad,
    LocalMav,
    MoranI,
    GearyC,
    GradientMagnitude,
    LaplacianMagnitude,
    HessianMagnitude,
    DoG,
    LoG,
    VarOfLaplacian,
    VarOfGradient,
    VarOfSqGradient,
    MeanTimestamp,
}

/// Direction of improvement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// `+1` for maximization, `−1` for minimization.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }
}

impl LossKind {
    /// One representative per table row, area and range with the
    /// exponential weight.
    pub const TABLE: [LossKind; 22] = [
        LossKind::Variance,
        LossKind::MeanSquare,
        LossKind::Mad,
        LossKind::Mav,
        LossKind::Entropy,
        LossKind::Area(Weight::Exp),
        LossKind::Range(Weight::Exp),
        LossKind::LocalVariance,
        LossKind::LocalMs,
        LossKind::LocalMad,
        LossKind::LocalMav,
        LossKind::MoranI,
        LossKind::GearyC,
        LossKind::GradientMagnitude,
        LossKind::LaplacianMagnitude,
        LossKind::HessianMagnitude,
        LossKind::DoG,
        LossKind::LoG,
        LossKind::VarOfLaplacian,
        LossKind::VarOfGradient,
        LossKind::VarOfSqGradient,
        LossKind::MeanTimestamp,
    ];

    pub fn sense(self) -> Sense {
        match self {
            LossKind::Area(_) | LossKind::MoranI | LossKind::MeanTimestamp => Sense::Minimize,
            _ => Sense::Maximize,
        }
    }

    /// Whether the loss has a closed-form parameter gradient.
    pub fn has_analytic_gradient(self) -> bool {
        !matches!(self, LossKind::MoranI | LossKind::GearyC | LossKind::MeanTimestamp)
    }

    /// Whether the loss depends on pixel arrangement, not only on the
    /// distribution of pixel values.
    pub fn is_spatial(self) -> bool {
        !matches!(
            self,
            LossKind::Variance | LossKind::MeanSquare | LossKind::Mad | LossKind::Mav | LossKind::Entropy | LossKind::Area(_) | LossKind::Range(_)
        )
    }

    /// Losses that are constant in θ when polarity is ignored.
    pub fn degenerate_without_polarity(self) -> bool {
        matches!(self, LossKind::Mav | LossKind::LocalMav)
    }

    pub fn name(self) -> String {
        match self {
            LossKind::Area(w) => format!("area-{}", w.suffix()),
            LossKind::Range(w) => format!("range-{}", w.suffix()),
            other => other.base_name().to_string(),
        }
    }

    fn base_name(self) -> &'static str {
        match self {
            LossKind::Variance => "variance",
            LossKind::MeanSquare => "mean-square",
            LossKind::Mad => "mad",
            LossKind::Mav => "mav",
            LossKind::Entropy => "entropy",
            LossKind::Area(_) => "area",
            LossKind::Range(_) => "range",
            LossKind::LocalVariance => "local-variance",
            LossKind::LocalMs => "local-ms",
            LossKind::LocalMad => "local-mad",
            LossKind::LocalMav => "local-mav",
            LossKind::MoranI => "moran",
            LossKind::GearyC => "geary",
            LossKind::GradientMagnitude => "gradient-magnitude",
            LossKind::LaplacianMagnitude => "laplacian-magnitude",
            LossKind::HessianMagnitude => "hessian-magnitude",
            LossKind::DoG => "dog",
            LossKind::LoG => "log",
            LossKind::VarOfLaplacian => "var-laplacian",
            LossKind::VarOfGradient => "var-gradient",
            LossKind::VarOfSqGradient => "var-sq-gradient",
            LossKind::MeanTimestamp => "mean-timestamp",
        }
    }

    /// Every kind including all four weights of area and range.
    pub fn all() -> Vec<LossKind> {
        let mut out = Vec::new();
        for k in Self::TABLE {
            match k {
                LossKind::Area(_) => out.extend(Weight::ALL.map(LossKind::Area)),
                LossKind::Range(_) => out.extend(Weight::ALL.map(LossKind::Range)),
                k => out.push(k),
            }
        }
        out
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LossKind {
    type Err = LossError;

    fn from_str(s: &str) -> Result<Self, LossError> {
        let s = s.trim().to_ascii_lowercase();
        let alias = match s.as_str() {
            "area" => Some(LossKind::Area(Weight::Exp)),
            "range" => Some(LossKind::Range(Weight::Exp)),
            "ms" => Some(LossKind::MeanSquare),
            "moran-i" => Some(LossKind::MoranI),
            "geary-c" => Some(LossKind::GearyC),
            _ => None,
        };
        alias.or_else(|| LossKind::all().into_iter().find(|k| k.name() == s)).ok_or(LossError::UnknownName(s))
    }
}

/// Tunable widths and discretization choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    /// Gaussian width of the local statistics, px.
    pub sigma_local: f64,
    /// Inner DoG width, px.
    pub sigma1: f64,
    /// Outer DoG width, px.
    pub sigma2: f64,
    /// Ratio `σ2/σ1` of the LoG approximation.
    pub log_ratio: f64,
    /// Spatial weight width of Moran's I and Geary's C, px.
    pub sigma_moran: f64,
    /// Histogram bins spanning `[min I, max I]`.
    pub bins: usize,
    /// PDF smoothing width, bins.
    pub sigma_bins: f64,
    /// Replace `sign(x)` by `tanh(kx)` in the MAD/MAV gradients. `None`
    /// uses the exact sign, which matches the value path everywhere the
    /// value is differentiable.
    pub sign_smoothing: Option<f64>,
}

impl Default for LossParams {
    fn default() -> Self {
        Self { sigma_local: 3.0, sigma1: 1.0, sigma2: 3.0, log_ratio: 1.6, sigma_moran: 1.0, bins: 200, sigma_bins: 5.0, sign_smoothing: None }
    }
}

impl LossParams {
    pub fn validate(&self) -> Result<(), LossError> {
        let widths = [self.sigma_local, self.sigma1, self.sigma2, self.sigma_moran, self.sigma_bins];
        if widths.iter().any(|w| !(*w > 0.0)) {
            return Err(LossError::Parameter("kernel widths must be positive".into()));
        }
        if !(self.log_ratio > 1.0) {
            return Err(LossError::Parameter("LoG ratio must exceed 1".into()));
        }
        if self.bins < 2 {
            return Err(LossError::Parameter("at least two histogram bins are required".into()));
        }
        if self.sign_smoothing.is_some_and(|k| !(k > 0.0)) {
            return Err(LossError::Parameter("sign smoothing must be positive".into()));
        }
        Ok(())
    }
}

/// A loss kind with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
    pub params: LossParams,
}

/// Origin of a reported gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientSource {
    Analytic,
    FiniteDifference,
}

/// Loss value with an optional parameter gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEval<T> {
    pub value: T,
    pub gradient: Option<Vec<T>>,
    pub source: GradientSource,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        Self { kind, params: LossParams::default() }
    }

    pub fn with_params(kind: LossKind, params: LossParams) -> Self {
        Self { kind, params }
    }

    pub fn sense(&self) -> Sense {
        self.kind.sense()
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    /// Value on an IWE.
    pub fn value<T: Scalar>(&self, image: &ImageGrid<T>) -> Result<T, LossError> {
        Ok(self.eval(image, &[])?.0)
    }

    /// Value and analytic gradient from an IWE with derivative images.
    pub fn value_and_gradient<T: Scalar>(&self, iwg: &IweWithGradient<T>) -> Result<LossEval<T>, LossError> {
        if !self.kind.has_analytic_gradient() {
            return Err(LossError::NoAnalyticGradient(self.kind.base_name()));
        }
        let (value, grad) = self.eval(&iwg.image, &iwg.grads)?;
        Ok(LossEval { value, gradient: Some(grad), source: GradientSource::Analytic })
    }

    /// Value and directional derivatives along each image in `grads`.
    pub(crate) fn eval<T: Scalar>(&self, img: &ImageGrid<T>, grads: &[ImageGrid<T>]) -> Result<(T, Vec<T>), LossError> {
        self.params.validate()?;
        if img.is_empty() {
            return Err(LossError::TooSmall);
        }
        let p = &self.params;
        match self.kind {
            LossKind::Variance => Ok(stats::variance_d(img, grads)),
            LossKind::MeanSquare => Ok(stats::mean_square_d(img, grads)),
            LossKind::Mad => Ok(stats::mad_d(img, grads, p.sign_smoothing)),
            LossKind::Mav => Ok(stats::mav_d(img, grads, p.sign_smoothing)),
            LossKind::Area(w) => stats::area_d(img, grads, w),
            LossKind::Entropy => pdf::entropy_d(img, grads, p.bins, p.sigma_bins),
            LossKind::Range(w) => pdf::range_d(img, grads, w, p.bins, p.sigma_bins),
            LossKind::LocalVariance => Ok(local::local_d(img, grads, LocalKind::Variance, p.sigma_local)),
            LossKind::LocalMs => Ok(local::local_d(img, grads, LocalKind::MeanSquare, p.sigma_local)),
            LossKind::LocalMad => Ok(local::local_d(img, grads, LocalKind::Mad, p.sigma_local)),
            LossKind::LocalMav => Ok(local::local_d(img, grads, LocalKind::Mav, p.sigma_local)),
            LossKind::MoranI => Ok((moran_i(img, p.sigma_moran)?, Vec::new())),
            LossKind::GearyC => Ok((geary_c(img, p.sigma_moran)?, Vec::new())),
            LossKind::GradientMagnitude => derivative::derivative_d(img, grads, DerivativeKind::Gradient, p),
            LossKind::LaplacianMagnitude => derivative::derivative_d(img, grads, DerivativeKind::Laplacian, p),
            LossKind::HessianMagnitude => derivative::derivative_d(img, grads, DerivativeKind::Hessian, p),
            LossKind::DoG => derivative::derivative_d(img, grads, DerivativeKind::DoG, p),
            LossKind::LoG => derivative::derivative_d(img, grads, DerivativeKind::LoG, p),
            LossKind::VarOfLaplacian => derivative::composite_d(img, grads, CompositeKind::Laplacian),
            LossKind::VarOfGradient => derivative::composite_d(img, grads, CompositeKind::GradientMagnitude),
            LossKind::VarOfSqGradient => derivative::composite_d(img, grads, CompositeKind::SquaredGradient),
            LossKind::MeanTimestamp => Err(LossError::NeedsTimestamps("mean-timestamp")),
        }
    }
}

/// `Σ a·b` over pixels.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &ImageGrid<T>, b: &ImageGrid<T>) -> T {
    a.as_slice().iter().zip(b.as_slice()).map(|(&x, &y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_twenty_two_rows_and_goals() {
        assert_eq!(LossKind::TABLE.len(), 22);
        let minimized: Vec<_> = LossKind::TABLE.iter().filter(|k| k.sense() == Sense::Minimize).collect();
        assert_eq!(minimized, vec![&LossKind::Area(Weight::Exp), &LossKind::MoranI, &LossKind::MeanTimestamp]);
        assert_eq!(LossKind::GearyC.sense(), Sense::Maximize);
        assert_eq!(LossKind::Range(Weight::Lorentzian).sense(), Sense::Maximize);
    }

    #[test]
    fn names_round_trip() {
        for k in LossKind::all() {
            assert_eq!(k.name().parse::<LossKind>().unwrap(), k);
        }
        assert_eq!("area".parse::<LossKind>().unwrap(), LossKind::Area(Weight::Exp));
        assert!("sharpness".parse::<LossKind>().is_err());
    }

    #[test]
    fn weights_are_primitives_of_densities() {
        for w in Weight::ALL {
            assert_eq!(w.primitive(0.0f64), 0.0);
            for l in [0.0f64, 0.3, 1.0, 2.5] {
                let h = 1e-6;
                let fd = (w.primitive(l + h) - w.primitive(l - h)) / (2.0 * h);
                assert!((fd - w.density(l)).abs() < 1e-8, "{w:?} at {l}");
            }
        }
    }

    #[test]
    fn params_validation() {
        let bad = LossParams { bins: 1, ..LossParams::default() };
        assert!(bad.validate().is_err());
        let bad = LossParams { sigma_local: 0.0, ..LossParams::default() };
        assert!(LossSpec::with_params(LossKind::LocalVariance, bad).value(&ImageGrid::<f64>::zeros(4, 4)).is_err());
    }
}
