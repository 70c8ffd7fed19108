//! Parametric point trajectories `x' = W(x, t; θ)` and their Jacobians.

mod depth;
mod flow;
mod rotation;

pub use depth::{warp_depth, DepthWarp};
pub use flow::warp_flow;
pub use rotation::warp_rotation;

use crate::error::IweError;
use crate::event::{CameraGeometry, Event};

/// Largest parameter dimension over all models.
pub const MAX_DIM: usize = 3;

/// Event transported to the reference time.
///
/// `jacobian[j]` is `∂x'/∂θ_j`; rows past the model dimension are zero.
/// `valid` is false when the geometry breaks down (point behind a camera).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedEvent {
    pub point: [f64; 2],
    pub jacobian: Option<[[f64; 2]; MAX_DIM]>,
    pub valid: bool,
}

impl WarpedEvent {
    pub(crate) fn invalid() -> Self {
        Self { point: [f64::NAN; 2], jacobian: None, valid: false }
    }
}

/// Typed parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpParams {
    /// Angular velocity, rad/s.
    Rotation([f64; 3]),
    /// Image velocity, px/s.
    Flow([f64; 2]),
    /// Plane depth, m.
    Depth(f64),
}

impl WarpParams {
    pub fn dim(&self) -> usize {
        self.as_slice().len()
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            WarpParams::Rotation(w) => w,
            WarpParams::Flow(v) => v,
            WarpParams::Depth(z) => std::slice::from_ref(z),
        }
    }
}

/// A warp model bound to the geometry it needs.
#[derive(Debug, Clone)]
pub enum Warp {
    Rotation(CameraGeometry),
    Flow,
    Depth(DepthWarp),
}

impl Warp {
    pub fn dim(&self) -> usize {
        match self {
            Warp::Rotation(_) => 3,
            Warp::Flow => 2,
            Warp::Depth(_) => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Warp::Rotation(_) => "rotation",
            Warp::Flow => "flow",
            Warp::Depth(_) => "depth",
        }
    }

    pub fn check_dim(&self, theta: &[f64]) -> Result<(), IweError> {
        if theta.len() == self.dim() {
            Ok(())
        } else {
            Err(IweError::Dimension { expected: self.dim(), got: theta.len() })
        }
    }

    /// Warp one event. `theta` must have length [`Warp::dim`].
    #[inline]
    pub fn apply(&self, e: &Event, t_ref: f64, theta: &[f64], with_jacobian: bool) -> WarpedEvent {
        match self {
            Warp::Rotation(cam) => warp_rotation(e, t_ref, [theta[0], theta[1], theta[2]], cam, with_jacobian),
            Warp::Flow => warp_flow(e, t_ref, [theta[0], theta[1]]),
            Warp::Depth(d) => d.apply(e, theta[0], with_jacobian),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{Polarity, PoseSample, PoseTrack, Quaternion};
    use proptest::prelude::*;

    fn cam() -> CameraGeometry {
        CameraGeometry::new(64, 64, 60.0, 61.0, 31.5, 30.0, [0.0; 5]).unwrap()
    }

    fn depth_warp() -> Warp {
        let track = PoseTrack::new(vec![
            PoseSample { t: 0.0, rotation: Quaternion::IDENTITY, translation: [-0.1, 0.0, 0.0] },
            PoseSample { t: 1.0, rotation: Quaternion::from_rotation_vector([0.01, 0.05, 0.0]), translation: [0.15, 0.02, 0.03] },
        ])
        .unwrap();
        Warp::Depth(DepthWarp::new(cam(), track, 0.5).unwrap())
    }

    fn warps() -> Vec<(Warp, Vec<f64>)> {
        vec![(Warp::Rotation(cam()), vec![0.8, -1.1, 2.3]), (Warp::Flow, vec![-40.0, 12.0]), (depth_warp(), vec![1.3])]
    }

    /// Relative or absolute agreement with a tolerance scaled by the
    /// magnitudes involved.
    fn agree(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn events_at_reference_time_are_fixed() {
        for (w, th) in warps() {
            let e = Event::new(0.5, 17.0, 40.0, Polarity::Positive);
            let we = w.apply(&e, 0.5, &th, false);
            assert!(we.valid);
            assert!((we.point[0] - 17.0).abs() < 1e-9 && (we.point[1] - 40.0).abs() < 1e-9, "{}", w.name());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn jacobians_match_finite_differences(
            x in 0.0f64..63.0, y in 0.0f64..63.0, t in 0.0f64..1.0,
            th in prop::array::uniform3(-3.0f64..3.0), z in 0.4f64..4.0,
        ) {
            let e = Event::new(t, x.round(), y.round(), Polarity::Negative);
            for (w, _) in warps() {
                let theta: Vec<f64> = match w { Warp::Depth(_) => vec![z], _ => th[..w.dim()].to_vec() };
                let we = w.apply(&e, 0.5, &theta, true);
                // Near the projection pole the FD truncation error grows like 1/z³;
                // such points land far off any sensor and never reach an IWE.
                if !we.valid || we.point.iter().any(|c| c.abs() > 640.0) { continue; }
                let jac = we.jacobian.unwrap();
                let h = 1e-4;
                for j in 0..w.dim() {
                    let mut p = theta.clone();
                    p[j] += h;
                    let mut m = theta.clone();
                    m[j] -= h;
                    let (a, b) = (w.apply(&e, 0.5, &p, false), w.apply(&e, 0.5, &m, false));
                    #[allow(clippy::needless_range_loop)]
                    for axis in 0..2 {
                        let fd = (a.point[axis] - b.point[axis]) / (2.0 * h);
                        prop_assert!(agree(jac[j][axis], fd, 1e-4), "{} j={j} axis={axis}: {} vs {fd}", w.name(), jac[j][axis]);
                    }
                }
            }
        }
    }
}
