use super::{finite, ObjectiveFn};
use crate::error::OptimError;

/// Conjugate-direction update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CgVariant {
    /// Polak–Ribière with `β = max(β, 0)`.
    #[default]
    PolakRibierePlus,
    FletcherReeves,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub variant: CgVariant,
    pub max_iterations: usize,
    /// Stop when `‖∇f‖` falls below this.
    pub gradient_tolerance: f64,
    /// Stop when an accepted step moves θ by less than this (parameter units).
    pub step_tolerance: f64,
    /// Armijo sufficient-increase constant, in `(0, 1)`.
    pub armijo_c: f64,
    /// Backtracking factor, in `(0, 1)`.
    pub shrink: f64,
    /// Length of the first trial step, in parameter units.
    pub initial_step: f64,
    pub max_backtracks: usize,
    /// Step doublings tried after an accepted trial.
    pub max_expansions: usize,
    /// Restart with steepest ascent every this many iterations; `None`
    /// means the parameter dimension.
    pub restart_every: Option<usize>,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            variant: CgVariant::default(),
            max_iterations: 100,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-6,
            armijo_c: 1e-4,
            shrink: 0.5,
            initial_step: 1.0,
            max_backtracks: 40,
            max_expansions: 8,
            restart_every: None,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::Config(m.to_string()));
        if !(self.gradient_tolerance > 0.0 && self.step_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("Armijo constant must lie in (0, 1)");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0) {
            return bad("initial step must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    StepTolerance,
    /// No trial step improved the objective.
    LineSearch,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub theta: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub theta: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub gradient_evaluations: usize,
    pub value_evaluations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Starting point followed by every accepted iterate.
    pub trace: Vec<TraceEntry>,
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trial value; loss errors at a trial point reject the trial instead of
/// aborting, non-finite values abort.
fn trial<O: ObjectiveFn + ?Sized>(obj: &O, theta: &[f64], evals: &mut usize) -> Result<Option<f64>, OptimError> {
    *evals += 1;
    match obj.value(theta) {
        Ok(v) => finite(theta, v).map(Some),
        Err(OptimError::Loss(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Nonlinear conjugate-gradient ascent with Armijo backtracking.
///
/// The returned value is never below the value at `theta0`.
pub fn maximize<O: ObjectiveFn + ?Sized>(obj: &O, theta0: &[f64], cfg: &OptimConfig) -> Result<OptimResult, OptimError> {
    cfg.validate()?;
    if theta0.len() != obj.dim() {
        return Err(OptimError::Config(format!("initial point has {} entries, objective expects {}", theta0.len(), obj.dim())));
    }
    let restart = cfg.restart_every.unwrap_or(obj.dim()).max(1);
    let mut theta = theta0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&theta)?;
    finite(&theta, f)?;
    let mut grad_evals = 1;
    let mut value_evals = 0;
    let mut trace = vec![TraceEntry { theta: theta.clone(), value: f }];
    let mut d = g.clone();
    let mut alpha_prev: Option<(f64, f64)> = None;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if !gnorm.is_finite() {
            return Err(OptimError::NonFinite { theta });
        }
        if gnorm < cfg.gradient_tolerance {
            stop = StopReason::GradientTolerance;
            break;
        }
        let mut slope = dot(&g, &d);
        if slope <= 0.0 {
            d = g.clone();
            slope = gnorm * gnorm;
        }
        let dnorm = dot(&d, &d).sqrt();
        let mut alpha = match alpha_prev {
            Some((a, s)) => (a * s / slope).min(cfg.initial_step * 1e3 / dnorm),
            None => cfg.initial_step / dnorm,
        };

        // Backtracking to the Armijo condition.
        let mut accepted: Option<f64> = None;
        for _ in 0..=cfg.max_backtracks {
            let cand = axpy(&theta, alpha, &d);
            if let Some(v) = trial(obj, &cand, &mut value_evals)? {
                if v >= f + cfg.armijo_c * alpha * slope {
                    accepted = Some(v);
                    break;
                }
            }
            alpha *= cfg.shrink;
        }
        let Some(mut f_new) = accepted else {
            stop = StopReason::LineSearch;
            break;
        };
        // Bounded expansion while the value keeps improving.
        for _ in 0..cfg.max_expansions {
            let a2 = 2.0 * alpha;
            let cand = axpy(&theta, a2, &d);
            match trial(obj, &cand, &mut value_evals)? {
                Some(v) if v > f_new && v >= f + cfg.armijo_c * a2 * slope => {
                    alpha = a2;
                    f_new = v;
                }
                _ => break,
            }
        }
        // One parabolic refinement through f(0), f'(0) and f(α).
        let curv = f + slope * alpha - f_new;
        if curv > 0.0 {
            let aq = slope * alpha * alpha / (2.0 * curv);
            if aq.is_finite() && aq > 0.0 && (aq - alpha).abs() > 1e-12 * alpha {
                let cand = axpy(&theta, aq, &d);
                if let Some(v) = trial(obj, &cand, &mut value_evals)? {
                    if v > f_new && v >= f + cfg.armijo_c * aq * slope {
                        alpha = aq;
                    }
                }
            }
        }

        let step: Vec<f64> = d.iter().map(|di| alpha * di).collect();
        let new_theta = axpy(&theta, alpha, &d);
        let (fv, g_new) = obj.value_and_gradient(&new_theta)?;
        grad_evals += 1;
        finite(&new_theta, fv)?;
        iterations += 1;
        theta = new_theta;
        f = fv;
        trace.push(TraceEntry { theta: theta.clone(), value: f });
        alpha_prev = Some((alpha, slope));

        if dot(&step, &step).sqrt() < cfg.step_tolerance {
            stop = StopReason::StepTolerance;
            break;
        }
        let beta = if iterations % restart == 0 {
            0.0
        } else {
            let gg = dot(&g, &g);
            match cfg.variant {
                CgVariant::PolakRibierePlus => {
                    let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                    (dot(&g_new, &y) / gg).max(0.0)
                }
                CgVariant::FletcherReeves => dot(&g_new, &g_new) / gg,
            }
        };
        d = g_new.iter().zip(&d).map(|(gi, di)| gi + beta * di).collect();
        g = g_new;
    }
    let converged = stop != StopReason::MaxIterations;
    Ok(OptimResult { theta, value: f, iterations, gradient_evaluations: grad_evals, value_evaluations: value_evals, converged, stop, trace })
}
