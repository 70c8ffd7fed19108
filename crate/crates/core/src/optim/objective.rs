use std::marker::PhantomData;

use super::{finite_diff_gradient, ObjectiveFn};
use crate::error::OptimError;
use crate::event::{EventWindow, Polarity};
use crate::iwe::{accumulate_iwe, accumulate_iwe_with_gradient, timestamp_image, IweOptions};
use crate::loss::{mean_timestamp_loss, GradientSource, LossEval, LossKind, LossSpec};
use crate::scalar::Scalar;
use crate::warp::Warp;

/// How the parameter gradient is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GradientMode {
    /// Analytic where available, central differences otherwise.
    #[default]
    Analytic,
    /// Central differences with step `h` for every loss.
    FiniteDifference { h: f64 },
}

/// Default finite-difference step for losses without an analytic gradient.
const FALLBACK_STEP: f64 = 1e-4;

/// A focus loss of the IWE as a function of the warp parameters.
///
/// Images are accumulated in `T`; parameters and values cross the
/// optimizer boundary as `f64`. Through [`ObjectiveFn`] the value is
/// sign-adjusted so that larger is always better.
pub struct FocusObjective<'a, T> {
    window: &'a EventWindow,
    warp: &'a Warp,
    loss: LossSpec,
    opts: IweOptions,
    mode: GradientMode,
    _scalar: PhantomData<fn() -> T>,
}

impl<'a, T: Scalar> FocusObjective<'a, T> {
    pub fn new(window: &'a EventWindow, warp: &'a Warp, loss: LossSpec, opts: IweOptions) -> Self {
        Self { window, warp, loss, opts, mode: GradientMode::Analytic, _scalar: PhantomData }
    }

    pub fn with_gradient_mode(mut self, mode: GradientMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn options(&self) -> &IweOptions {
        &self.opts
    }

    /// The area loss needs a non-negative image, so with polarity it is
    /// the sum over the two single-polarity images.
    fn split_by_polarity(&self) -> bool {
        matches!(self.loss.kind, LossKind::Area(_)) && self.opts.use_polarity
    }

    fn parts(&self) -> Vec<IweOptions> {
        if self.split_by_polarity() {
            [Polarity::Positive, Polarity::Negative].into_iter().map(|p| self.opts.with_polarity(false).only(Some(p))).collect()
        } else {
            vec![self.opts]
        }
    }

    /// Raw loss value, not sign-adjusted.
    pub fn loss_value(&self, theta: &[f64]) -> Result<f64, OptimError> {
        if self.loss.kind == LossKind::MeanTimestamp {
            let ts = timestamp_image::<T>(self.window, self.warp, theta, &self.opts)?;
            return Ok(mean_timestamp_loss(&ts)?.as_f64());
        }
        let mut total = 0.0;
        for opts in self.parts() {
            let iwe = accumulate_iwe::<T>(self.window, self.warp, theta, &opts)?;
            total += self.loss.value(&iwe.image)?.as_f64();
        }
        Ok(total)
    }

    /// Raw loss value and gradient, not sign-adjusted.
    pub fn loss_eval(&self, theta: &[f64]) -> Result<LossEval<f64>, OptimError> {
        let h = match self.mode {
            GradientMode::FiniteDifference { h } => Some(h),
            GradientMode::Analytic if !self.loss.kind.has_analytic_gradient() => Some(FALLBACK_STEP),
            GradientMode::Analytic => None,
        };
        if let Some(h) = h {
            let value = self.loss_value(theta)?;
            let gradient = finite_diff_gradient(|t| self.loss_value(t), theta, h)?;
            return Ok(LossEval { value, gradient: Some(gradient), source: GradientSource::FiniteDifference });
        }
        let mut value = 0.0;
        let mut gradient = vec![0.0; self.warp.dim()];
        for opts in self.parts() {
            let iwg = accumulate_iwe_with_gradient::<T>(self.window, self.warp, theta, &opts)?;
            let ev = self.loss.value_and_gradient(&iwg)?;
            value += ev.value.as_f64();
            for (g, d) in gradient.iter_mut().zip(ev.gradient.unwrap_or_default()) {
                *g += d.as_f64();
            }
        }
        Ok(LossEval { value, gradient: Some(gradient), source: GradientSource::Analytic })
    }
}

impl<T: Scalar> ObjectiveFn for FocusObjective<'_, T> {
    fn dim(&self) -> usize {
        self.warp.dim()
    }

    fn value(&self, theta: &[f64]) -> Result<f64, OptimError> {
        Ok(self.loss.sense().sign() * self.loss_value(theta)?)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>), OptimError> {
        let s = self.loss.sense().sign();
        let ev = self.loss_eval(theta)?;
        let g = ev.gradient.unwrap_or_default().into_iter().map(|g| s * g).collect();
        Ok((s * ev.value, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Event, Polarity};
    use crate::loss::Weight;

    fn moving_dots(v: [f64; 2]) -> EventWindow {
        let mut events = Vec::new();
        for k in 0..400 {
            let t = k as f64 / 400.0 * 0.2;
            let (x0, y0) = (8.0 + (k % 5) as f64 * 9.0, 10.0 + (k % 3) as f64 * 12.0);
            let p = if k % 2 == 0 { Polarity::Positive } else { Polarity::Negative };
            events.push(Event::new(t, x0 + v[0] * t, y0 + v[1] * t, p));
        }
        EventWindow::with_t_ref(events, 0.0)
    }

    #[test]
    fn analytic_matches_finite_difference() {
        let w = moving_dots([20.0, -10.0]);
        let warp = Warp::Flow;
        let opts = IweOptions::new(64, 48);
        for kind in [LossKind::Variance, LossKind::Area(Weight::Exp), LossKind::Entropy] {
            let a = FocusObjective::<f64>::new(&w, &warp, LossSpec::new(kind), opts);
            let f = FocusObjective::<f64>::new(&w, &warp, LossSpec::new(kind), opts).with_gradient_mode(GradientMode::FiniteDifference { h: 1e-4 });
            let theta = [15.0, -6.0];
            let ga = a.loss_eval(&theta).unwrap().gradient.unwrap();
            let gf = f.loss_eval(&theta).unwrap().gradient.unwrap();
            for (x, y) in ga.iter().zip(&gf) {
                assert!((x - y).abs() <= 1e-4 * (1.0 + y.abs()), "{kind:?}: {ga:?} vs {gf:?}");
            }
        }
    }

    #[test]
    fn fd_only_losses_fall_back() {
        let w = moving_dots([20.0, -10.0]);
        let warp = Warp::Flow;
        let obj = FocusObjective::<f64>::new(&w, &warp, LossSpec::new(LossKind::MoranI), IweOptions::new(64, 48));
        let ev = obj.loss_eval(&[0.0, 0.0]).unwrap();
        assert_eq!(ev.source, GradientSource::FiniteDifference);
        assert_eq!(ev.gradient.unwrap().len(), 2);
    }

    #[test]
    fn objective_is_sense_adjusted() {
        let w = moving_dots([20.0, -10.0]);
        let warp = Warp::Flow;
        let spec = LossSpec::new(LossKind::MeanTimestamp);
        let obj = FocusObjective::<f64>::new(&w, &warp, spec, IweOptions::new(64, 48));
        let raw = obj.loss_value(&[1.0, 1.0]).unwrap();
        assert_eq!(obj.value(&[1.0, 1.0]).unwrap(), -raw);
    }

    #[test]
    fn area_with_polarity_is_defined() {
        let w = moving_dots([20.0, -10.0]);
        let warp = Warp::Flow;
        let spec = LossSpec::new(LossKind::Area(Weight::Exp));
        let on = FocusObjective::<f64>::new(&w, &warp, spec, IweOptions::new(64, 48).with_polarity(true));
        assert!(on.loss_value(&[20.0, -10.0]).unwrap().is_finite());
    }
}
