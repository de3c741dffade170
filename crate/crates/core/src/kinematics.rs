//! Serial revolute chains: forward kinematics, contact-sensor placement and
//! the linear Jacobian of each sensor center.
//!
//! Planar chains are represented as spatial chains whose joints all rotate
//! about the workspace z-axis and whose geometry lies in the z = 0 plane, so
//! the same code path serves both. Workspace vectors are always
//! [`Vector3`]; for planar chains the z component is zero.

use nalgebra::{DMatrix, DVector, Isometry3, Point3, Translation3, Unit, UnitQuaternion, Vector3};
use thiserror::Error;

/// A joint-angle vector (radians).
pub type Configuration = DVector<f64>;

/// Rigid placement of a link frame in the workspace frame.
pub type Pose = Isometry3<f64>;

/// Workspace dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn from_arity(n: usize) -> Option<Dim> {
        match n {
            2 => Some(Dim::Two),
            3 => Some(Dim::Three),
            _ => None,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("chain has no joints")]
    Empty,
    #[error("joint {joint}: rotation axis must be unit length (norm {norm})")]
    AxisNotUnit { joint: usize, norm: f64 },
    #[error("joint {joint}: planar chains only rotate about the z-axis")]
    PlanarAxis { joint: usize },
    #[error("joint {joint}: planar geometry must have zero z offset")]
    PlanarOffset { joint: usize },
    #[error("joint {joint}: lower limit {lo} exceeds upper limit {hi}")]
    Limits { joint: usize, lo: f64, hi: f64 },
    #[error("sensor {sensor}: link index {link} out of range for {n_joints} joints")]
    SensorLink { sensor: usize, link: usize, n_joints: usize },
    #[error("sensor {sensor}: radius must be nonnegative and finite")]
    SensorRadius { sensor: usize },
}

/// One revolute joint. `offset` is the fixed translation from the parent
/// joint frame (or the chain base for joint 0) to this joint's origin,
/// expressed in the parent frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub axis: Unit<Vector3<f64>>,
    pub offset: Vector3<f64>,
    pub limits: (f64, f64),
}

impl Joint {
    pub fn revolute(axis: Vector3<f64>, offset: Vector3<f64>, limits: (f64, f64)) -> Self {
        Joint { axis: Unit::new_normalize(axis), offset, limits }
    }
}

/// An open serial chain of revolute joints.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainModel {
    dim: Dim,
    base: Vector3<f64>,
    joints: Vec<Joint>,
    tool: Vector3<f64>,
}

impl ChainModel {
    pub fn new(dim: Dim, base: Vector3<f64>, joints: Vec<Joint>, tool: Vector3<f64>) -> Result<Self, KinematicsError> {
        if joints.is_empty() {
            return Err(KinematicsError::Empty);
        }
        for (j, joint) in joints.iter().enumerate() {
            let norm = joint.axis.as_ref().norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(KinematicsError::AxisNotUnit { joint: j, norm });
            }
            let (lo, hi) = joint.limits;
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(KinematicsError::Limits { joint: j, lo, hi });
            }
            if dim == Dim::Two {
                let a = joint.axis.as_ref();
                if a.x.abs() > 1e-12 || a.y.abs() > 1e-12 {
                    return Err(KinematicsError::PlanarAxis { joint: j });
                }
                if joint.offset.z != 0.0 {
                    return Err(KinematicsError::PlanarOffset { joint: j });
                }
            }
        }
        Ok(ChainModel { dim, base, joints, tool })
    }

    /// Planar chain with joints at the ends of the given link lengths. The
    /// tool point sits at the end of the last link.
    pub fn planar(link_lengths: &[f64], limits: (f64, f64)) -> Result<Self, KinematicsError> {
        let joints = link_lengths
            .iter()
            .enumerate()
            .map(|(j, _)| {
                let reach = if j == 0 { 0.0 } else { link_lengths[j - 1] };
                Joint::revolute(Vector3::z(), Vector3::new(reach, 0.0, 0.0), limits)
            })
            .collect();
        let tool = Vector3::new(*link_lengths.last().unwrap_or(&0.0), 0.0, 0.0);
        ChainModel::new(Dim::Two, Vector3::zeros(), joints, tool)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn base(&self) -> Vector3<f64> {
        self.base
    }

    pub fn tool(&self) -> Vector3<f64> {
        self.tool
    }

    pub fn limits(&self) -> Vec<(f64, f64)> {
        self.joints.iter().map(|j| j.limits).collect()
    }

    /// Same chain with its base moved by `delta`.
    pub fn translated(&self, delta: Vector3<f64>) -> Self {
        ChainModel { base: self.base + delta, ..self.clone() }
    }

    /// Clamp every coordinate of `q` into the joint limits.
    pub fn clamp_to_limits(&self, q: &mut Configuration) {
        for (v, joint) in q.iter_mut().zip(&self.joints) {
            *v = v.clamp(joint.limits.0, joint.limits.1);
        }
    }

    pub fn within_limits(&self, q: &Configuration) -> bool {
        q.iter().zip(&self.joints).all(|(v, j)| *v >= j.limits.0 && *v <= j.limits.1)
    }

    /// Poses of every joint frame (indices `0..n`) followed by the tool frame
    /// (index `n`), composed root to tip.
    ///
    /// Joint limits are not enforced. Panics if `q` has the wrong length.
    pub fn forward_kinematics(&self, q: &Configuration) -> Vec<Pose> {
        let frames = self.frames(q.as_slice());
        let mut poses: Vec<Pose> = frames.iter().copied().map(Frame::to_pose).collect();
        let last = frames.last().expect("non-empty chain");
        poses.push(Pose::from_parts(
            Translation3::from(last.point(&self.tool)),
            UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(last.rotation)),
        ));
        poses
    }

    /// Tool point position.
    pub fn end_effector(&self, q: &Configuration) -> Vector3<f64> {
        let frames = self.frames(q.as_slice());
        frames.last().expect("non-empty chain").point(&self.tool)
    }

    /// Joint frames as rotation matrix + origin. This is the allocation-light
    /// path the loss and projection code use.
    pub fn frames(&self, q: &[f64]) -> Vec<Frame> {
        assert_eq!(
            q.len(),
            self.joints.len(),
            "configuration length {} does not match chain with {} joints",
            q.len(),
            self.joints.len()
        );
        let mut out = Vec::with_capacity(self.joints.len());
        let mut rotation = nalgebra::Matrix3::identity();
        let mut origin = self.base;
        for (joint, &angle) in self.joints.iter().zip(q) {
            origin += rotation * joint.offset;
            let world_axis = rotation * joint.axis.into_inner();
            rotation *= axis_angle(&joint.axis, angle);
            out.push(Frame { rotation, origin, axis: world_axis });
        }
        out
    }
}

/// A joint frame in the workspace: orientation, origin, and the joint's
/// rotation axis expressed in workspace coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub rotation: nalgebra::Matrix3<f64>,
    pub origin: Vector3<f64>,
    pub axis: Vector3<f64>,
}

impl Frame {
    #[inline]
    pub fn point(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.origin + self.rotation * local
    }

    fn to_pose(self) -> Pose {
        let rot = nalgebra::Rotation3::from_matrix_unchecked(self.rotation);
        Pose::from_parts(Translation3::from(self.origin), UnitQuaternion::from_rotation_matrix(&rot))
    }
}

#[inline]
fn axis_angle(axis: &Unit<Vector3<f64>>, angle: f64) -> nalgebra::Matrix3<f64> {
    let a = axis.as_ref();
    // z-axis joints dominate; skip the general Rodrigues form for them.
    if a.x == 0.0 && a.y == 0.0 {
        let (s, c) = angle.sin_cos();
        let s = s * a.z.signum();
        return nalgebra::Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    }
    *nalgebra::Rotation3::from_axis_angle(axis, angle).matrix()
}

/// A spherical (circular in 2D) contact sensor riding on a link.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorSpec {
    pub link: usize,
    pub offset: Vector3<f64>,
    pub radius: f64,
}

impl SensorSpec {
    pub fn new(link: usize, offset: Vector3<f64>, radius: f64) -> Self {
        SensorSpec { link, offset, radius }
    }

    /// Point sensor at the origin of a link frame.
    pub fn point(link: usize, offset: Vector3<f64>) -> Self {
        SensorSpec { link, offset, radius: 0.0 }
    }

    #[inline]
    pub fn center_in(&self, frames: &[Frame]) -> Vector3<f64> {
        frames[self.link].point(&self.offset)
    }
}

/// Check every sensor against the chain.
pub fn validate_sensors(chain: &ChainModel, sensors: &[SensorSpec]) -> Result<(), KinematicsError> {
    for (i, s) in sensors.iter().enumerate() {
        if s.link >= chain.n_joints() {
            return Err(KinematicsError::SensorLink { sensor: i, link: s.link, n_joints: chain.n_joints() });
        }
        if !(s.radius >= 0.0 && s.radius.is_finite()) {
            return Err(KinematicsError::SensorRadius { sensor: i });
        }
    }
    Ok(())
}

/// Workspace positions of the sensor centers `p_i(q)`.
///
/// Panics when a sensor references a link the chain does not have.
pub fn sensor_centers(chain: &ChainModel, q: &Configuration, sensors: &[SensorSpec]) -> Vec<Point3<f64>> {
    let frames = chain.frames(q.as_slice());
    sensors
        .iter()
        .map(|s| {
            assert!(s.link < frames.len(), "sensor link {} out of range", s.link);
            Point3::from(s.center_in(&frames))
        })
        .collect()
}

/// Linear Jacobian `dp/dq` of one sensor center, `dim x n`.
pub fn linear_jacobian(chain: &ChainModel, q: &Configuration, sensor: &SensorSpec) -> DMatrix<f64> {
    assert!(sensor.link < chain.n_joints(), "sensor link {} out of range", sensor.link);
    let frames = chain.frames(q.as_slice());
    let p = sensor.center_in(&frames);
    let rows = chain.dim().arity();
    let mut jac = DMatrix::zeros(rows, chain.n_joints());
    for (j, frame) in frames.iter().enumerate().take(sensor.link + 1) {
        let col = frame.axis.cross(&(p - frame.origin));
        for r in 0..rows {
            jac[(r, j)] = col[r];
        }
    }
    jac
}

/// Accumulate `scale * J^T v` into `out` without materializing `J`.
#[inline]
pub fn accumulate_jacobian_transpose(
    frames: &[Frame],
    link: usize,
    point: &Vector3<f64>,
    v: &Vector3<f64>,
    scale: f64,
    out: &mut [f64],
) {
    for (j, frame) in frames.iter().enumerate().take(link + 1) {
        let col = frame.axis.cross(&(point - frame.origin));
        out[j] += scale * col.dot(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn straight_two_link_tip() {
        let chain = ChainModel::planar(&[1.0, 1.0], (-3.2, 3.2)).unwrap();
        let poses = chain.forward_kinematics(&DVector::from_vec(vec![0.0, 0.0]));
        assert_eq!(poses.len(), 3);
        let tip = poses[2].translation.vector;
        assert!((tip - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn single_link_quarter_turn() {
        let chain = ChainModel::planar(&[1.0], (-3.2, 3.2)).unwrap();
        let tip = chain.end_effector(&DVector::from_vec(vec![FRAC_PI_2]));
        assert!((tip - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sensor_on_link_origin() {
        let chain = ChainModel::planar(&[1.0, 1.0], (-3.2, 3.2)).unwrap();
        let q = DVector::from_vec(vec![0.4, -0.3]);
        let s = SensorSpec::point(0, Vector3::zeros());
        let c = sensor_centers(&chain, &q, &[s]);
        assert!(c[0].coords.norm() < 1e-15);
        let tip = SensorSpec::point(1, Vector3::new(1.0, 0.0, 0.0));
        let c = sensor_centers(&chain, &DVector::zeros(2), &[tip]);
        assert!((c[0].coords - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn jacobian_single_link() {
        let chain = ChainModel::planar(&[1.0], (-3.2, 3.2)).unwrap();
        let s = SensorSpec::point(0, Vector3::new(1.0, 0.0, 0.0));
        let jac = linear_jacobian(&chain, &DVector::zeros(1), &s);
        assert_eq!(jac.shape(), (2, 1));
        assert!((jac[(0, 0)]).abs() < 1e-15);
        assert!((jac[(1, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn downstream_columns_zero() {
        let chain = ChainModel::planar(&[0.8, 0.6, 0.5], (-3.2, 3.2)).unwrap();
        let s = SensorSpec::point(0, Vector3::new(0.4, 0.0, 0.0));
        let jac = linear_jacobian(&chain, &DVector::from_vec(vec![0.3, 1.0, -0.5]), &s);
        for r in 0..2 {
            assert_eq!(jac[(r, 1)], 0.0);
            assert_eq!(jac[(r, 2)], 0.0);
        }
    }

    #[test]
    fn rejects_bad_chains() {
        let bad_axis = Joint {
            axis: Unit::new_unchecked(Vector3::new(0.0, 0.0, 2.0)),
            offset: Vector3::zeros(),
            limits: (-1.0, 1.0),
        };
        assert!(matches!(
            ChainModel::new(Dim::Three, Vector3::zeros(), vec![bad_axis], Vector3::zeros()),
            Err(KinematicsError::AxisNotUnit { .. })
        ));
        let tilted = Joint::revolute(Vector3::y(), Vector3::zeros(), (-1.0, 1.0));
        assert_eq!(
            ChainModel::new(Dim::Two, Vector3::zeros(), vec![tilted], Vector3::zeros()),
            Err(KinematicsError::PlanarAxis { joint: 0 })
        );
        let limits = Joint::revolute(Vector3::z(), Vector3::zeros(), (1.0, -1.0));
        assert!(matches!(
            ChainModel::new(Dim::Two, Vector3::zeros(), vec![limits], Vector3::zeros()),
            Err(KinematicsError::Limits { .. })
        ));
        let chain = ChainModel::planar(&[1.0], (-1.0, 1.0)).unwrap();
        assert!(validate_sensors(&chain, &[SensorSpec::point(1, Vector3::zeros())]).is_err());
    }

    #[test]
    #[should_panic]
    fn length_mismatch_panics() {
        let chain = ChainModel::planar(&[1.0, 1.0], (-3.2, 3.2)).unwrap();
        chain.forward_kinematics(&DVector::zeros(3));
    }
}
