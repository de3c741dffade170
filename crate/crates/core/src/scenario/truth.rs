use nalgebra::DVector;
use rand::Rng;

use super::collision::integrate_motion;
use crate::filter::{Observation, TransitionNoise};
use crate::kinematics::Configuration;
use crate::manifold::{uniform_in_ball, ContactVector, ProjectionSettings};
use crate::world::World;

/// Ground truth of a simulated trial. Unobserved joints keep an encoder
/// reading of zero, so their offset is their absolute angle.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthState {
    pub q_true: Configuration,
    pub encoder: DVector<f64>,
}

impl TruthState {
    pub fn new(q_true: Configuration, encoder: DVector<f64>) -> Self {
        assert_eq!(q_true.len(), encoder.len(), "dimension mismatch");
        TruthState { q_true, encoder }
    }

    /// `Δq_true = q_true - q_e`.
    pub fn offset(&self) -> DVector<f64> {
        &self.q_true - &self.encoder
    }
}

/// Execute one command: encoders advance by exactly `u·dt` on observed
/// joints; the true configuration follows a noisy command and is then
/// pushed out of any obstacle.
#[allow(clippy::too_many_arguments)]
pub fn step_truth<R: Rng + ?Sized>(
    state: &TruthState,
    u: &DVector<f64>,
    observed: &[bool],
    noise: &TransitionNoise,
    world: &World,
    settings: &ProjectionSettings,
    rng: &mut R,
) -> TruthState {
    let noisy = u + uniform_in_ball(u.len(), noise.r_a, rng);
    let q_true = integrate_motion(&state.q_true, &(noisy * noise.dt), world, settings).q;
    let mut encoder = state.encoder.clone();
    for (j, &o) in observed.iter().enumerate() {
        if o {
            encoder[j] += u[j] * noise.dt;
        }
    }
    TruthState { q_true, encoder }
}

/// Contact readings at the true configuration: sensor `i` reads contact iff
/// its sphere distance is at most `threshold`.
pub fn sense_contact(world: &World, q_true: &Configuration, threshold: f64) -> ContactVector {
    let frames = world.chain.frames(q_true.as_slice());
    ContactVector::new(world.sensors.iter().map(|s| world.sphere_distance(&frames, s).distance <= threshold).collect())
}

pub fn observe(state: &TruthState, observed: &[bool], world: &World, threshold: f64) -> Observation {
    Observation {
        encoder: state.encoder.clone(),
        observed: observed.to_vec(),
        contact: sense_contact(world, &state.q_true, threshold),
    }
}
