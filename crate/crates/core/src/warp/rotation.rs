use super::WarpedEvent;
use crate::event::{CameraGeometry, Event};
use crate::so3;

/// Constant body-rate rotation.
///
/// The bearing of the undistorted event is carried to the reference frame
/// by `exp((t − t_ref) ω^)` and reprojected through the pinhole model
/// without re-distortion. A bearing that ends behind the camera yields an
/// invalid event.
pub fn warp_rotation(e: &Event, t_ref: f64, omega: [f64; 3], cam: &CameraGeometry, with_jacobian: bool) -> WarpedEvent {
    let [xn, yn] = cam.undistort(e.x, e.y);
    let b = [xn, yn, 1.0];
    let dt = e.t - t_ref;
    let phi = so3::scale(omega, dt);
    let r = so3::exp(phi);
    let p = so3::mat_vec(&r, b);
    if p[2] <= 1e-9 {
        return WarpedEvent::invalid();
    }
    let iz = 1.0 / p[2];
    let point = [cam.fx * p[0] * iz + cam.cx, cam.fy * p[1] * iz + cam.cy];
    if !with_jacobian {
        return WarpedEvent { point, jacobian: None, valid: true };
    }
    // ∂p/∂ω = −Δt [p]x J_l(φ); the projection Jacobian maps it to pixels.
    let jl = so3::left_jacobian(phi);
    let px = so3::hat(p);
    let dp = so3::mat_mul(&px, &jl);
    let proj = [[cam.fx * iz, 0.0, -cam.fx * p[0] * iz * iz], [0.0, cam.fy * iz, -cam.fy * p[1] * iz * iz]];
    let mut jac = [[0.0; 2]; 3];
    for (j, col) in jac.iter_mut().enumerate() {
        for (axis, out) in col.iter_mut().enumerate() {
            *out = -dt * (0..3).map(|k| proj[axis][k] * dp[k][j]).sum::<f64>();
        }
    }
    WarpedEvent { point, jacobian: Some(jac), valid: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Polarity;

    fn cam() -> CameraGeometry {
        CameraGeometry::new(240, 180, 199.0, 198.0, 120.0, 90.0, [0.0; 5]).unwrap()
    }

    #[test]
    fn zero_rate_is_identity() {
        let e = Event::new(0.7, 33.0, 150.0, Polarity::Positive);
        let w = warp_rotation(&e, 0.2, [0.0; 3], &cam(), false);
        assert_eq!(w.point, [33.0, 150.0]);
    }

    #[test]
    fn principal_point_is_fixed_under_roll() {
        let e = Event::new(0.7, 120.0, 90.0, Polarity::Positive);
        for wz in [-8.0, 0.5, 30.0] {
            let w = warp_rotation(&e, 0.2, [0.0, 0.0, wz], &cam(), false);
            assert!((w.point[0] - 120.0).abs() < 1e-12 && (w.point[1] - 90.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mirrored_times_with_opposite_rates_agree() {
        let e1 = Event::new(0.3, 50.0, 20.0, Polarity::Positive);
        let e2 = Event::new(0.7, 50.0, 20.0, Polarity::Positive);
        let om = [0.4, -0.9, 1.7];
        let a = warp_rotation(&e1, 0.5, om, &cam(), false).point;
        let b = warp_rotation(&e2, 0.5, [-om[0], -om[1], -om[2]], &cam(), false).point;
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn behind_camera_is_invalid() {
        let e = Event::new(1.0, 0.0, 90.0, Polarity::Positive);
        let w = warp_rotation(&e, 0.0, [0.0, 3.0, 0.0], &cam(), true);
        assert!(!w.valid);
    }
}
