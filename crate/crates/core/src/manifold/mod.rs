//! The observation contact manifold, represented implicitly as the zero set of
//! the loss `D_c(q) = sum over active sensors of (Φ(p_i(q)) - r_i)^2`, and
//! local projection onto it by backtracking gradient descent.

mod descent;
mod sampling;

pub use descent::{DescentReport, DescentStop};
pub use sampling::{
    ball_initialization, sample_ball_projection, sample_particle_projection, sample_uniform_projection,
    uniform_in_ball, SampleBatch,
};

use nalgebra::{DVector, Vector3};

use crate::kinematics::{accumulate_jacobian_transpose, Configuration};
use crate::world::World;

/// Binary contact readings, one per sensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContactVector(Vec<bool>);

impl ContactVector {
    pub fn new(bits: Vec<bool>) -> Self {
        ContactVector(bits)
    }

    pub fn none(m: usize) -> Self {
        ContactVector(vec![false; m])
    }

    pub fn from_active(m: usize, active: &[usize]) -> Self {
        let mut bits = vec![false; m];
        for &i in active {
            bits[i] = true;
        }
        ContactVector(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// No sensor reports contact.
    pub fn is_clear(&self) -> bool {
        !self.0.iter().any(|b| *b)
    }

    /// Indices of the active sensors.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }
}

/// Gradient-descent projection parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionSettings {
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Loss threshold (m^2) below which a configuration counts as on the
    /// manifold.
    pub manifold_tolerance: f64,
    /// Stop when an accepted step is shorter than this (rad).
    pub step_tolerance: f64,
    /// Step halvings allowed per iteration before giving up.
    pub max_retries: usize,
    pub backtracking_factor: f64,
}

impl ProjectionSettings {
    /// Defaults for a grid of the given resolution: tolerance `(res/2)^2`.
    pub fn for_resolution(resolution: f64) -> Self {
        ProjectionSettings {
            learning_rate: 0.5,
            max_iterations: 100,
            manifold_tolerance: (0.5 * resolution).powi(2),
            step_tolerance: 1e-6,
            max_retries: 20,
            backtracking_factor: 0.5,
        }
    }

    pub fn check(&self) -> Result<(), &'static str> {
        if !(self.learning_rate > 0.0) {
            return Err("learning_rate must be positive");
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be positive");
        }
        if !(self.manifold_tolerance > 0.0) {
            return Err("manifold_tolerance must be positive");
        }
        if !(self.step_tolerance > 0.0) {
            return Err("step_tolerance must be positive");
        }
        if self.max_retries == 0 {
            return Err("max_retries must be positive");
        }
        if !(self.backtracking_factor > 0.0 && self.backtracking_factor < 1.0) {
            return Err("backtracking_factor must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    LocalMinimum,
    IterationCap,
    OutOfWorkspace,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionOutcome {
    Converged { q: Configuration, residual: f64, iterations: usize },
    Failed { reason: FailureReason, residual: f64 },
}

impl ProjectionOutcome {
    pub fn converged(self) -> Option<Configuration> {
        match self {
            ProjectionOutcome::Converged { q, .. } => Some(q),
            ProjectionOutcome::Failed { .. } => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, ProjectionOutcome::Converged { .. })
    }
}

/// Loss value plus whether any active sensor left the SDF bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub out_of_bounds: bool,
}

/// `D_c(q)`. The all-clear contact vector has loss 0.
pub fn loss(world: &World, q: &Configuration, c: &ContactVector) -> LossValue {
    ContactLoss { world, contact: c }.eval(q.as_slice())
}

/// Chain-rule gradient `sum 2 d_i J_i^T ∇Φ(p_i)`.
pub fn loss_gradient(world: &World, q: &Configuration, c: &ContactVector) -> DVector<f64> {
    let mut g = DVector::zeros(q.len());
    ContactLoss { world, contact: c }.gradient(q.as_slice(), g.as_mut_slice());
    g
}

/// Project `start` onto `M(c)` by backtracking gradient descent, clamped to
/// the joint limits.
pub fn project(
    world: &World,
    start: &Configuration,
    c: &ContactVector,
    settings: &ProjectionSettings,
) -> ProjectionOutcome {
    project_traced(world, start, c, settings, None)
}

/// As [`project`], recording the loss after every accepted iterate.
pub fn project_traced(
    world: &World,
    start: &Configuration,
    c: &ContactVector,
    settings: &ProjectionSettings,
    trace: Option<&mut Vec<f64>>,
) -> ProjectionOutcome {
    let objective = ContactLoss { world, contact: c };
    let tolerance = settings.manifold_tolerance;
    let report = descent::descend(
        &objective,
        start.clone(),
        settings,
        descent::StepRule::Fixed,
        Some(&world.chain),
        true,
        |e| e.value < tolerance,
        trace,
    );
    match report.stop {
        DescentStop::Reached => {
            ProjectionOutcome::Converged { q: report.q, residual: report.value, iterations: report.iterations }
        }
        DescentStop::OutOfWorkspace => {
            ProjectionOutcome::Failed { reason: FailureReason::OutOfWorkspace, residual: report.value }
        }
        DescentStop::IterationCap => {
            ProjectionOutcome::Failed { reason: FailureReason::IterationCap, residual: report.value }
        }
        DescentStop::StepTooSmall | DescentStop::NoDescent => {
            ProjectionOutcome::Failed { reason: FailureReason::LocalMinimum, residual: report.value }
        }
    }
}

/// Value of an objective at a point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Eval {
    pub value: f64,
    /// Smallest sphere distance seen (meters).
    pub worst: f64,
    pub out_of_bounds: bool,
}

pub(crate) trait Objective {
    fn eval(&self, q: &[f64]) -> Eval;
    fn gradient(&self, q: &[f64], out: &mut [f64]);
}

struct ContactLoss<'a> {
    world: &'a World,
    contact: &'a ContactVector,
}

impl ContactLoss<'_> {
    fn eval(&self, q: &[f64]) -> LossValue {
        let e = Objective::eval(self, q);
        LossValue { value: e.value, out_of_bounds: e.out_of_bounds }
    }
}

impl Objective for ContactLoss<'_> {
    fn eval(&self, q: &[f64]) -> Eval {
        let mut e = Eval { value: 0.0, worst: f64::INFINITY, out_of_bounds: false };
        if self.contact.is_clear() {
            return e;
        }
        let frames = self.world.chain.frames(q);
        for i in self.contact.active() {
            let d = self.world.sphere_distance(&frames, &self.world.sensors[i]);
            e.value += d.distance * d.distance;
            e.worst = e.worst.min(d.distance);
            e.out_of_bounds |= d.out_of_bounds;
        }
        e
    }

    fn gradient(&self, q: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        if self.contact.is_clear() {
            return;
        }
        let frames = self.world.chain.frames(q);
        for i in self.contact.active() {
            let sensor = &self.world.sensors[i];
            let d = self.world.sphere_distance(&frames, sensor);
            let normal: Vector3<f64> = self.world.sdf.sample_gradient(&d.center).value;
            accumulate_jacobian_transpose(&frames, sensor.link, &d.center, &normal, 2.0 * d.distance, out);
        }
    }
}

/// Penetration loss over every collision sphere. Spheres listed in
/// `anchored` contribute `d_i^2` (pulled onto the surface from either side);
/// all others contribute `min(d_i, 0)^2`. Anchoring the spheres that start
/// inside an obstacle stops a push-out step from overshooting far past the
/// surface.
pub(crate) struct PenetrationLoss<'a> {
    pub world: &'a World,
    pub anchored: Vec<bool>,
}

impl PenetrationLoss<'_> {
    #[inline]
    fn residual(&self, i: usize, d: f64) -> f64 {
        if self.anchored.get(i).copied().unwrap_or(false) {
            d
        } else {
            d.min(0.0)
        }
    }
}

impl Objective for PenetrationLoss<'_> {
    fn eval(&self, q: &[f64]) -> Eval {
        let frames = self.world.chain.frames(q);
        let mut e = Eval { value: 0.0, worst: f64::INFINITY, out_of_bounds: false };
        for (i, s) in self.world.collision_spheres().enumerate() {
            let d = self.world.sphere_distance(&frames, s);
            let r = self.residual(i, d.distance);
            e.value += r * r;
            e.worst = e.worst.min(d.distance);
            e.out_of_bounds |= d.out_of_bounds;
        }
        e
    }

    fn gradient(&self, q: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let frames = self.world.chain.frames(q);
        for (i, s) in self.world.collision_spheres().enumerate() {
            let d = self.world.sphere_distance(&frames, s);
            let r = self.residual(i, d.distance);
            if r != 0.0 {
                let normal = self.world.sdf.sample_gradient(&d.center).value;
                accumulate_jacobian_transpose(&frames, s.link, &d.center, &normal, 2.0 * r, out);
            }
        }
    }
}

/// Signed distance of every collision sphere at `q` (sensors first).
pub(crate) fn sphere_distances(world: &World, q: &Configuration) -> Vec<f64> {
    let frames = world.chain.frames(q.as_slice());
    world.collision_spheres().map(|s| world.sphere_distance(&frames, s).distance).collect()
}

/// Push `start` out of the environment. Spheres penetrating at `start` are
/// pulled to the surface; the others only kept from penetrating.
pub(crate) fn descend_penetration(
    world: &World,
    start: Configuration,
    settings: &ProjectionSettings,
    tolerance: f64,
    trace: Option<&mut Vec<f64>>,
) -> DescentReport {
    let anchored = sphere_distances(world, &start).into_iter().map(|d| d < 0.0).collect();
    descent::descend(
        &PenetrationLoss { world, anchored },
        start,
        settings,
        descent::StepRule::Polyak { scale: 2.0 },
        None,
        false,
        |e| e.worst >= -tolerance,
        trace,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{ChainModel, SensorSpec};
    use crate::sdf::{Primitive, SdfGrid, WorkspaceBounds};

    fn wall_world() -> World {
        // obstacle occupies x <= 0; one-link arm rooted at (1, 0) pointing +x
        let bounds = WorkspaceBounds::planar([-1.0, -1.5], [3.0, 1.5]).unwrap();
        let sdf = SdfGrid::from_primitives(&[Primitive::half_space(Vector3::x(), 0.0)], bounds, 0.02).unwrap();
        let chain = ChainModel::planar(&[0.5], (-3.2, 3.2)).unwrap().translated(Vector3::new(1.0, 0.0, 0.0));
        let sensors =
            vec![SensorSpec::point(0, Vector3::new(0.5, 0.0, 0.0)), SensorSpec::point(0, Vector3::new(0.25, 0.0, 0.0))];
        World::new(chain, sensors, vec![], sdf).unwrap()
    }

    #[test]
    fn clear_contact_has_zero_loss() {
        let w = wall_world();
        let q = DVector::from_vec(vec![0.3]);
        assert_eq!(loss(&w, &q, &ContactVector::none(2)).value, 0.0);
        assert_eq!(loss_gradient(&w, &q, &ContactVector::none(2)), DVector::zeros(1));
    }

    #[test]
    fn loss_of_point_sensors_near_wall() {
        let w = wall_world();
        // pointing +x: tip at x = 1.5, mid sensor at x = 1.25
        let q = DVector::from_vec(vec![0.0]);
        let tip_only = loss(&w, &q, &ContactVector::from_active(2, &[0])).value;
        let both = loss(&w, &q, &ContactVector::from_active(2, &[0, 1])).value;
        let res = 0.02;
        // interpolated half-space field is exact up to one voxel
        let d1: f64 = 1.5;
        let d2: f64 = 1.25;
        assert!((tip_only.sqrt() - d1).abs() <= res);
        assert!((both - (d1 * d1 + d2 * d2)).abs() <= 2.0 * res * (d1 + d2) + 2.0 * res * res);
    }

    #[test]
    fn descent_step_reduces_loss() {
        let w = wall_world();
        let c = ContactVector::from_active(2, &[0]);
        // pointing down-left; tip at (1 - 0.5 sin45, -0.5 sin45)
        let q = DVector::from_vec(vec![-2.3]);
        let g = loss_gradient(&w, &q, &c);
        let before = loss(&w, &q, &c).value;
        let after = loss(&w, &(&q - 0.05 * &g), &c).value;
        assert!(after < before);
        // turning further toward the wall (more negative angle, toward pi) reduces the gap
        assert!(g[0] > 0.0);
    }

    #[test]
    fn settings_validation() {
        let mut s = ProjectionSettings::for_resolution(0.02);
        assert!(s.check().is_ok());
        assert!((s.manifold_tolerance - 1e-4).abs() < 1e-18);
        s.backtracking_factor = 1.0;
        assert!(s.check().is_err());
    }
}
