//! Ground-truth simulation and the benchmark harness: noisy execution with
//! soft frictionless collisions, thresholded contact sensing, lockstep
//! trials of several estimators, and W-RMSE aggregation.

mod collision;
mod config;
mod experiment;
mod script;
mod trial;
mod truth;

pub use collision::{integrate_motion, resolve_collision, Resolution, SUBSTEP_VOXELS};
pub use config::{Scenario, ScenarioError, Violation};
pub use experiment::{run_experiment, ExperimentReport, StepSummary, TimingRow};
pub use script::{ActionScript, ScriptError};
pub use trial::{run_trial, Estimator, StepRecord, TrialTrace, UnknownEstimator};
pub use truth::{observe, sense_contact, step_truth, TruthState};

use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::filter::{FilterModels, Observation};
use crate::manifold::uniform_in_ball;
use crate::sdf::SdfGrid;
use crate::world::World;

/// A scenario with its distance field built.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub scenario: Scenario,
    pub world: Arc<World>,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, ScenarioError> {
        let invalid =
            |field: &str, message: String| ScenarioError::Invalid(vec![Violation { field: field.into(), message }]);
        let sdf = SdfGrid::from_primitives(&scenario.environment, scenario.bounds, scenario.resolution)
            .map_err(|e| invalid("environment", e.to_string()))?;
        let world = World::new(scenario.chain.clone(), scenario.sensors.clone(), scenario.bodies.clone(), sdf)
            .map_err(|e| invalid("sensors", e.to_string()))?;
        Ok(Simulation { scenario, world: Arc::new(world) })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::new(Scenario::load(path)?)
    }

    pub fn models(&self) -> FilterModels {
        let s = &self.scenario;
        FilterModels {
            world: Arc::clone(&self.world),
            transition: s.transition,
            observation: s.observation.clone(),
            kde: s.kde.clone(),
            projection: s.projection.clone(),
            resample: s.resample,
            inactive_factor: s.inactive_factor,
            particles: s.particles,
        }
    }

    pub fn observed(&self) -> &[bool] {
        &self.scenario.unobserved.observed
    }

    /// The true state starts at the scenario's start configuration with an
    /// offset drawn from the same prior the estimators use; the encoders
    /// read `start - Δq`. Unobserved joints start at a uniform draw from
    /// their prior ball.
    pub fn initial_truth<R: Rng + ?Sized>(&self, rng: &mut R) -> TruthState {
        let s = &self.scenario;
        let observed = self.observed();
        let n = s.start.len();
        let mut offset = nalgebra::DVector::zeros(n);
        for j in 0..n {
            if observed[j] {
                let normal = Normal::new(0.0, s.observation.offset_variance[j].sqrt()).expect("positive variance");
                offset[j] = normal.sample(rng);
            }
        }
        let hidden: Vec<usize> = (0..n).filter(|&j| !observed[j]).collect();
        let mut q_true = s.start.clone();
        if !hidden.is_empty() {
            let ball = uniform_in_ball(hidden.len(), s.unobserved.radius, rng);
            for (slot, &j) in hidden.iter().enumerate() {
                q_true[j] = ball[slot];
            }
        }
        let q_true = resolve_collision(&q_true, &self.world, &s.projection).q;
        let mut encoder = &q_true - &offset;
        for &j in &hidden {
            encoder[j] = 0.0;
        }
        TruthState::new(q_true, encoder)
    }

    pub fn step_truth<R: Rng + ?Sized>(
        &self,
        state: &TruthState,
        u: &nalgebra::DVector<f64>,
        rng: &mut R,
    ) -> TruthState {
        let s = &self.scenario;
        step_truth(state, u, self.observed(), &s.transition, &self.world, &s.projection, rng)
    }

    pub fn observe(&self, state: &TruthState) -> Observation {
        observe(state, self.observed(), &self.world, self.scenario.contact_threshold)
    }
}
