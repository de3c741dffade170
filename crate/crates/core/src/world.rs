use nalgebra::Vector3;

use crate::kinematics::{validate_sensors, ChainModel, Frame, KinematicsError, SensorSpec};
use crate::sdf::SdfGrid;

/// Everything geometric the estimators need: the robot, its contact sensors,
/// any additional collision spheres, and the environment's distance field.
#[derive(Clone, Debug)]
pub struct World {
    pub chain: ChainModel,
    pub sensors: Vec<SensorSpec>,
    /// Collision-only spheres (not sensing). Sensors also collide.
    pub bodies: Vec<SensorSpec>,
    pub sdf: SdfGrid,
}

/// Signed distance of one sphere to the environment.
#[derive(Clone, Copy, Debug)]
pub struct SphereDistance {
    pub center: Vector3<f64>,
    pub distance: f64,
    pub out_of_bounds: bool,
}

impl World {
    pub fn new(
        chain: ChainModel,
        sensors: Vec<SensorSpec>,
        bodies: Vec<SensorSpec>,
        sdf: SdfGrid,
    ) -> Result<Self, KinematicsError> {
        validate_sensors(&chain, &sensors)?;
        validate_sensors(&chain, &bodies)?;
        Ok(World { chain, sensors, bodies, sdf })
    }

    pub fn n_joints(&self) -> usize {
        self.chain.n_joints()
    }

    pub fn n_sensors(&self) -> usize {
        self.sensors.len()
    }

    /// `Φ(p(q)) - r` for a sphere given precomputed joint frames.
    #[inline]
    pub fn sphere_distance(&self, frames: &[Frame], sphere: &SensorSpec) -> SphereDistance {
        let center = sphere.center_in(frames);
        let s = self.sdf.sample_distance(&center);
        SphereDistance { center, distance: s.value - sphere.radius, out_of_bounds: s.out_of_bounds }
    }

    /// Sensors first, then collision-only bodies.
    pub fn collision_spheres(&self) -> impl Iterator<Item = &SensorSpec> {
        self.sensors.iter().chain(self.bodies.iter())
    }
}
