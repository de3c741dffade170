use crate::kinematics::Configuration;

use crate::manifold::{descend_penetration, sphere_distances, ProjectionSettings};
use crate::world::World;

/// Result of soft-collision resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub q: Configuration,
    /// Smallest signed sphere distance at `q` (m).
    pub worst: f64,
    /// Every sphere ended at distance `>= -tolerance`.
    pub resolved: bool,
    pub iterations: usize,
}

/// Frictionless soft collision: a configuration whose spheres all clear the
/// environment is returned unchanged; otherwise it is pushed out along the
/// penetration gradient until every sphere sits within the manifold
/// tolerance of the surface. Never fails; the least-penetrating iterate is
/// returned when the descent stalls.
pub fn resolve_collision(q_cand: &Configuration, world: &World, settings: &ProjectionSettings) -> Resolution {
    let tolerance = settings.manifold_tolerance;
    let worst = sphere_distances(world, q_cand).into_iter().fold(f64::INFINITY, f64::min);
    if worst >= 0.0 {
        return Resolution { q: q_cand.clone(), worst, resolved: true, iterations: 0 };
    }
    let report = descend_penetration(world, q_cand.clone(), settings, tolerance, None);
    Resolution { resolved: report.worst >= -tolerance, q: report.q, worst: report.worst, iterations: report.iterations }
}

/// Largest sphere-center displacement allowed between collision checks, in
/// voxels. Keeps fast motions from tunnelling through thin obstacles.
pub const SUBSTEP_VOXELS: f64 = 0.25;
const MAX_SUBSTEPS: usize = 64;

/// Move from `q` by `delta`, resolving collisions along the way. The motion
/// is split so that no sphere center travels more than
/// [`SUBSTEP_VOXELS`] voxels (measured by chord) between resolutions.
pub fn integrate_motion(
    q: &Configuration,
    delta: &Configuration,
    world: &World,
    settings: &ProjectionSettings,
) -> Resolution {
    let substeps = substep_count(q, delta, world);
    let step = delta / substeps as f64;
    let mut current = q.clone();
    let mut out = None;
    for _ in 0..substeps {
        let r = resolve_collision(&(&current + &step), world, settings);
        current.copy_from(&r.q);
        out = Some(r);
    }
    out.expect("at least one substep")
}

fn substep_count(q: &Configuration, delta: &Configuration, world: &World) -> usize {
    let limit = SUBSTEP_VOXELS * world.sdf.resolution();
    let a = world.chain.frames(q.as_slice());
    let b = world.chain.frames((q + delta).as_slice());
    let travel = world.collision_spheres().map(|s| (s.center_in(&a) - s.center_in(&b)).norm()).fold(0.0, f64::max);
    ((travel / limit).ceil() as usize).clamp(1, MAX_SUBSTEPS)
}
