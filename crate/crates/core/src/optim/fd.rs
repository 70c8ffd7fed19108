use super::finite;
use crate::error::OptimError;

/// Central differences `(f(θ + h e_j) − f(θ − h e_j)) / 2h`; `2M` calls.
pub fn finite_diff_gradient<F>(f: F, theta: &[f64], h: f64) -> Result<Vec<f64>, OptimError>
where
    F: Fn(&[f64]) -> Result<f64, OptimError>,
{
    if !(h > 0.0) {
        return Err(OptimError::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            probe[j] = theta[j] + h;
            let fp = finite(&probe, f(&probe)?)?;
            probe[j] = theta[j] - h;
            let fm = finite(&probe, f(&probe)?)?;
            probe[j] = theta[j];
            Ok((fp - fm) / (2.0 * h))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_is_exact() {
        let a = [0.5, -2.0, 3.25];
        let g = finite_diff_gradient(|t| Ok(a.iter().zip(t).map(|(x, y)| x * y).sum()), &[0.3, 0.1, -7.0], 1e-4).unwrap();
        for (gi, ai) in g.iter().zip(a) {
            assert!((gi - ai).abs() < 1e-10);
        }
    }

    #[test]
    fn fourth_power_of_l4_norm() {
        // ‖θ‖₄⁴ = Σ θ⁴ has gradient 4θ³.
        let g = finite_diff_gradient(|t| Ok(t.iter().map(|v| v.powi(4)).sum()), &[1.0, 1.0], 1e-4).unwrap();
        assert!((g[0] - 4.0).abs() < 1e-6 && (g[1] - 4.0).abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn non_finite_probe_is_an_error() {
        let r = finite_diff_gradient(|t| Ok(if t[0] > 0.0 { f64::INFINITY } else { 0.0 }), &[0.0], 1e-3);
        assert!(matches!(r, Err(OptimError::NonFinite { .. })));
        assert!(finite_diff_gradient(|_| Ok(0.0), &[0.0], 0.0).is_err());
    }
}
