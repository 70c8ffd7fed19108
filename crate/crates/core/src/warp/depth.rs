use super::WarpedEvent;
use crate::error::DataError;
use crate::event::{CameraGeometry, Event, PoseSample, PoseTrack};
use crate::so3::{self, Mat3};

/// Plane-sweep warp onto the fronto-parallel plane at depth `Z` of the
/// reference camera.
///
/// The viewing ray of each event, taken from the pose at its timestamp, is
/// intersected with the plane and the intersection is projected into the
/// reference view. This makes the IWE at depth `Z` a slice of the disparity
/// space image of the reference view.
#[derive(Debug, Clone)]
pub struct DepthWarp {
    camera: CameraGeometry,
    track: PoseTrack,
    reference: PoseSample,
    ref_rt: Mat3,
}

impl DepthWarp {
    /// Reference pose is the track interpolated at `t_ref`.
    pub fn new(camera: CameraGeometry, track: PoseTrack, t_ref: f64) -> Result<Self, DataError> {
        let reference = track.interpolate(t_ref)?;
        let ref_rt = so3::transpose(&reference.rotation.to_matrix());
        Ok(Self { camera, track, reference, ref_rt })
    }

    pub fn camera(&self) -> &CameraGeometry {
        &self.camera
    }

    pub fn reference(&self) -> &PoseSample {
        &self.reference
    }

    pub fn track(&self) -> &PoseTrack {
        &self.track
    }

    /// Events outside the pose track are invalid.
    pub fn apply(&self, e: &Event, z: f64, with_jacobian: bool) -> WarpedEvent {
        match self.track.interpolate(e.t) {
            Ok(pose) => project_on_plane(e, &pose, &self.reference, &self.ref_rt, z, &self.camera, with_jacobian),
            Err(_) => WarpedEvent::invalid(),
        }
    }
}

/// Single-event form with explicit poses.
pub fn warp_depth(e: &Event, pose_at_t: &PoseSample, ref_pose: &PoseSample, z: f64, cam: &CameraGeometry, with_jacobian: bool) -> WarpedEvent {
    let ref_rt = so3::transpose(&ref_pose.rotation.to_matrix());
    project_on_plane(e, pose_at_t, ref_pose, &ref_rt, z, cam, with_jacobian)
}

fn project_on_plane(
    e: &Event,
    pose: &PoseSample,
    reference: &PoseSample,
    ref_rt: &Mat3,
    z: f64,
    cam: &CameraGeometry,
    with_jacobian: bool,
) -> WarpedEvent {
    if !(z > 0.0) {
        return WarpedEvent::invalid();
    }
    let [xn, yn] = cam.undistort(e.x, e.y);
    // Ray origin and direction in the reference camera frame.
    let c = so3::mat_vec(ref_rt, so3::sub(pose.translation, reference.translation));
    let d = so3::mat_vec(ref_rt, pose.rotation.rotate([xn, yn, 1.0]));
    if d[2].abs() < 1e-12 {
        return WarpedEvent::invalid();
    }
    let s = (z - c[2]) / d[2];
    if s <= 0.0 {
        return WarpedEvent::invalid();
    }
    let (rx, ry) = (d[0] / d[2], d[1] / d[2]);
    let k = 1.0 - c[2] / z;
    let u = c[0] / z + k * rx;
    let v = c[1] / z + k * ry;
    let point = [cam.fx * u + cam.cx, cam.fy * v + cam.cy];
    let jacobian = with_jacobian.then(|| {
        let iz2 = 1.0 / (z * z);
        [[cam.fx * (c[2] * rx - c[0]) * iz2, cam.fy * (c[2] * ry - c[1]) * iz2], [0.0; 2], [0.0; 2]]
    });
    WarpedEvent { point, jacobian, valid: true }
}
