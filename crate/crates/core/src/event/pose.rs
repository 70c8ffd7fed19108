use crate::error::DataError;
use crate::so3::{self, Mat3, Vec3};

/// Hamilton quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Self = Self { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    fn vec(&self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    /// Unit quaternion of the rotation vector `phi` (axis times angle).
    pub fn from_rotation_vector(phi: Vec3) -> Self {
        let th2 = so3::dot(phi, phi);
        let th = th2.sqrt();
        let (w, s) = if th < 1e-8 { (1.0 - th2 / 8.0, 0.5 - th2 / 48.0) } else { ((0.5 * th).cos(), (0.5 * th).sin() / th) };
        Self::new(w, s * phi[0], s * phi[1], s * phi[2])
    }

    /// Rotation vector with angle in `[0, π]`.
    pub fn to_rotation_vector(&self) -> Vec3 {
        let q = if self.w < 0.0 { Self::new(-self.w, -self.x, -self.y, -self.z) } else { *self };
        let v = q.vec();
        let n = so3::norm(v);
        let f = if n < 1e-12 { 2.0 / q.w } else { 2.0 * n.atan2(q.w) / n };
        so3::scale(v, f)
    }

    pub fn to_matrix(&self) -> Mat3 {
        let Self { w, x, y, z } = self.normalized();
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        so3::mat_vec(&self.to_matrix(), v)
    }

    /// Spherical interpolation along the shortest arc, `s ∈ [0, 1]`.
    pub fn slerp(&self, other: &Self, s: f64) -> Self {
        let rel = (self.conjugate() * *other).to_rotation_vector();
        *self * Self::from_rotation_vector(so3::scale(rel, s))
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Self;

    fn mul(self, r: Self) -> Self {
        Self::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

/// Camera-to-world pose at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub t: f64,
    pub rotation: Quaternion,
    pub translation: Vec3,
}

impl PoseSample {
    pub fn identity(t: f64) -> Self {
        Self { t, rotation: Quaternion::IDENTITY, translation: [0.0; 3] }
    }
}

/// Time-sorted pose samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTrack {
    samples: Vec<PoseSample>,
}

impl PoseTrack {
    /// Sorts samples by time (stable) and normalizes rotations.
    pub fn new(mut samples: Vec<PoseSample>) -> Result<Self, DataError> {
        if samples.len() < 2 {
            return Err(DataError::TooFewPoses);
        }
        for s in &mut samples {
            s.rotation = s.rotation.normalized();
        }
        samples.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[PoseSample] {
        &self.samples
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    /// Indices `(i, i + 1)` with `t_i ≤ t ≤ t_{i+1}`.
    fn bracket(&self, t: f64) -> Result<usize, DataError> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(DataError::OutOfRange { t, start: self.start(), end: self.end() });
        }
        let i = self.samples.partition_point(|s| s.t <= t);
        let i = i.clamp(1, self.samples.len() - 1) - 1;
        Ok(i)
    }

    /// Pose at `t`: linear in translation, slerp in rotation.
    pub fn interpolate(&self, t: f64) -> Result<PoseSample, DataError> {
        let i = self.bracket(t)?;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let dt = b.t - a.t;
        if dt <= 0.0 {
            return if t == a.t { Ok(PoseSample { t, ..*a }) } else { Err(DataError::DegenerateInterval(a.t)) };
        }
        let s = (t - a.t) / dt;
        Ok(PoseSample {
            t,
            rotation: a.rotation.slerp(&b.rotation, s),
            translation: so3::add(a.translation, so3::scale(so3::sub(b.translation, a.translation), s)),
        })
    }

    /// Body-frame angular velocity `log(R_aᵀ R_b) / (t_b − t_a)` of the
    /// samples bracketing `t`.
    pub fn angular_velocity(&self, t: f64) -> Result<Vec3, DataError> {
        let i = self.bracket(t)?;
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let dt = b.t - a.t;
        if dt <= 0.0 {
            return Err(DataError::DegenerateInterval(a.t));
        }
        let rel = (a.rotation.conjugate() * b.rotation).to_rotation_vector();
        Ok(so3::scale(rel, 1.0 / dt))
    }
}

/// Ground-truth angular velocity at `t` from a sorted pose sequence.
pub fn angular_velocity_from_poses(poses: &[PoseSample], t: f64) -> Result<Vec3, DataError> {
    PoseTrack::new(poses.to_vec())?.angular_velocity(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(t: f64, phi: Vec3) -> PoseSample {
        PoseSample { t, rotation: Quaternion::from_rotation_vector(phi), translation: [0.0; 3] }
    }

    fn assert_vec(a: Vec3, b: Vec3, tol: f64) {
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn constant_rotation_has_zero_rate() {
        let p = [sample(0.0, [0.1, 0.2, 0.3]), sample(0.01, [0.1, 0.2, 0.3])];
        assert_vec(angular_velocity_from_poses(&p, 0.005).unwrap(), [0.0; 3], 1e-12);
    }

    #[test]
    fn rotation_about_z() {
        let p = [sample(0.0, [0.0; 3]), sample(0.005, [0.0, 0.0, 0.02])];
        assert_vec(angular_velocity_from_poses(&p, 0.001).unwrap(), [0.0, 0.0, 4.0], 1e-9);
    }

    #[test]
    fn range_and_degenerate_errors() {
        let p = [sample(0.0, [0.0; 3]), sample(0.01, [0.0; 3])];
        assert!(matches!(angular_velocity_from_poses(&p, 0.02), Err(DataError::OutOfRange { .. })));
        let d = [sample(0.0, [0.0; 3]), sample(0.0, [0.0, 0.0, 0.1])];
        assert!(matches!(angular_velocity_from_poses(&d, 0.0), Err(DataError::DegenerateInterval(_))));
    }

    #[test]
    fn interpolation_hits_samples_and_midpoints() {
        let track = PoseTrack::new(vec![
            PoseSample { t: 0.0, rotation: Quaternion::IDENTITY, translation: [0.0, 0.0, 0.0] },
            PoseSample { t: 1.0, rotation: Quaternion::from_rotation_vector([0.0, 0.4, 0.0]), translation: [2.0, 0.0, 0.0] },
        ])
        .unwrap();
        let mid = track.interpolate(0.5).unwrap();
        assert_vec(mid.translation, [1.0, 0.0, 0.0], 1e-15);
        assert_vec(mid.rotation.to_rotation_vector(), [0.0, 0.2, 0.0], 1e-14);
        assert_eq!(track.interpolate(1.0).unwrap().translation, [2.0, 0.0, 0.0]);
    }

    fn arb_vec(r: f64) -> impl Strategy<Value = Vec3> {
        [-r..r, -r..r, -r..r]
    }

    proptest! {
        #[test]
        fn matches_finite_difference_of_track(a in arb_vec(3.0), d in arb_vec(0.3), s in 0.1f64..0.9) {
            let dt = 0.005;
            let track = PoseTrack::new(vec![sample(0.0, a), PoseSample { t: dt, rotation: Quaternion::from_rotation_vector(a) * Quaternion::from_rotation_vector(d), translation: [0.0; 3] }]).unwrap();
            let omega = track.angular_velocity(s * dt).unwrap();
            let h = 1e-6;
            let q0 = track.interpolate(s * dt - h).unwrap().rotation;
            let q1 = track.interpolate(s * dt + h).unwrap().rotation;
            let fd = so3::scale((q0.conjugate() * q1).to_rotation_vector(), 0.5 / h);
            for i in 0..3 {
                prop_assert!((omega[i] - fd[i]).abs() < 1e-6, "{omega:?} vs {fd:?}");
            }
        }

        #[test]
        fn reversing_time_negates_rate(a in arb_vec(3.0), b in arb_vec(3.0), s in 0.0f64..1.0) {
            let fwd = [sample(0.0, a), sample(0.01, b)];
            let rev = [sample(-0.01, b), sample(0.0, a)];
            let w1 = angular_velocity_from_poses(&fwd, 0.01 * s).unwrap();
            let w2 = angular_velocity_from_poses(&rev, -0.01 * s).unwrap();
            for i in 0..3 {
                prop_assert!((w1[i] + w2[i]).abs() < 1e-9);
            }
        }
    }
}
