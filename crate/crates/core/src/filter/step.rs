use std::sync::Arc;
use std::time::Duration;

use nalgebra::DVector;
use rand::Rng;

use super::{
    init_belief, resample_systematic_to, Kde, KdeSettings, Observation, ObservationNoise, Particle, ParticleSet,
    TransitionNoise, UnobservedPrior,
};
use crate::clock::Stopwatch;
use crate::kinematics::Configuration;
use crate::manifold::{
    sample_ball_projection, sample_particle_projection, sample_uniform_projection, uniform_in_ball, ContactVector,
    ProjectionSettings, SampleBatch,
};
use crate::rng::{map_indexed, seeded, stream, SimRng};
use crate::scenario::integrate_motion;
use crate::world::World;

/// Smallest per-sensor factor an inactive sensor can contribute.
pub const LIKELIHOOD_FLOOR: f64 = 1e-6;

/// How the manifold filter initializes its projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Uniform,
    Particle,
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Conventional,
    Manifold(Strategy),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResamplePolicy {
    /// Resample when the effective sample size drops below half the count.
    EffectiveSampleSize,
    Always,
}

/// Everything a filter step needs besides the particles.
#[derive(Clone, Debug)]
pub struct FilterModels {
    pub world: Arc<World>,
    pub transition: TransitionNoise,
    pub observation: ObservationNoise,
    pub kde: KdeSettings,
    pub projection: ProjectionSettings,
    pub resample: ResamplePolicy,
    /// Multiply manifold samples by the inactive-sensor likelihood.
    pub inactive_factor: bool,
    /// Particle count `k`.
    pub particles: usize,
}

/// What happened during one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    /// All weights vanished and were reset to uniform.
    pub deprivation: bool,
    pub resampled: bool,
    /// Manifold samples missing relative to the request.
    pub shortfall: usize,
    /// The manifold sampler returned nothing and the step fell back to the
    /// conventional update.
    pub fallback: bool,
    pub contact: bool,
    pub transition_time: Duration,
    pub observation_time: Duration,
}

/// Sample the successor offset: integrate a noisy command from
/// `q = q_e_prev + Δq` with soft collisions, and re-express the result
/// against the next encoder reading.
#[allow(clippy::too_many_arguments)]
pub fn transition_sample<R: Rng + ?Sized>(
    offset: &DVector<f64>,
    command: &DVector<f64>,
    encoder_prev: &DVector<f64>,
    encoder_next: &DVector<f64>,
    noise: &TransitionNoise,
    world: &World,
    settings: &ProjectionSettings,
    rng: &mut R,
) -> DVector<f64> {
    assert_eq!(offset.len(), command.len(), "command dimension mismatch");
    let noisy = command + uniform_in_ball(command.len(), noise.r_a, rng);
    let resolved = integrate_motion(&(encoder_prev + offset), &(noisy * noise.dt), world, settings);
    resolved.q - encoder_next
}

#[inline]
fn gaussian_factor(distance: f64, sigma: f64) -> f64 {
    (-(distance * distance) / (2.0 * sigma * sigma)).exp()
}

/// Factor of an inactive sensor: the complement of the active Gaussian,
/// floored. A penetrating sphere would have read contact, so it gets the
/// floor outright.
#[inline]
fn inactive_factor(distance: f64, sigma: f64) -> f64 {
    if distance <= 0.0 {
        LIKELIHOOD_FLOOR
    } else {
        (1.0 - gaussian_factor(distance, sigma)).max(LIKELIHOOD_FLOOR)
    }
}

/// Pseudo-likelihood of the contact readings at `q`: a Gaussian in the
/// sphere distance for active sensors, [`inactive_factor`] for inactive
/// ones.
pub fn contact_likelihood(c: &ContactVector, q: &Configuration, world: &World, sigma_c: f64) -> f64 {
    let frames = world.chain.frames(q.as_slice());
    world
        .sensors
        .iter()
        .zip(c.bits())
        .map(|(sensor, &active)| {
            let d = world.sphere_distance(&frames, sensor).distance;
            if active {
                gaussian_factor(d, sigma_c)
            } else {
                inactive_factor(d, sigma_c)
            }
        })
        .product()
}

/// Product of the inactive-sensor factors of [`contact_likelihood`].
pub fn inactive_likelihood(c: &ContactVector, q: &Configuration, world: &World, sigma_c: f64) -> f64 {
    log_inactive_likelihood(c, q, world, sigma_c).exp()
}

/// Natural log of [`inactive_likelihood`]; finite because every factor is
/// floored.
pub fn log_inactive_likelihood(c: &ContactVector, q: &Configuration, world: &World, sigma_c: f64) -> f64 {
    let frames = world.chain.frames(q.as_slice());
    world
        .sensors
        .iter()
        .zip(c.bits())
        .filter(|(_, &active)| !active)
        .map(|(sensor, _)| inactive_factor(world.sphere_distance(&frames, sensor).distance, sigma_c).ln())
        .sum()
}

/// Ball radius for ball projection: the farthest a transition can move a
/// configuration, plus one kernel bandwidth.
pub fn ball_radius(command: &DVector<f64>, noise: &TransitionNoise, bandwidth: f64) -> f64 {
    command.norm() * noise.dt + noise.r_a * noise.dt + bandwidth
}

/// Forward-simulate every particle with its own seed-derived stream.
fn propagate(
    set: &ParticleSet,
    command: &DVector<f64>,
    encoder_prev: &DVector<f64>,
    encoder_next: &DVector<f64>,
    models: &FilterModels,
    seed: u64,
) -> Vec<DVector<f64>> {
    let particles = set.particles();
    map_indexed(particles.len(), |i| {
        let mut rng = stream(seed, i as u64);
        transition_sample(
            &particles[i].offset,
            command,
            encoder_prev,
            encoder_next,
            &models.transition,
            &models.world,
            &models.projection,
            &mut rng,
        )
    })
}

/// Normalize, recover from total weight loss, and resample per policy.
fn finish<R: Rng + ?Sized>(
    mut set: ParticleSet,
    target: usize,
    force_resample: bool,
    models: &FilterModels,
    rng: &mut R,
    diag: &mut StepDiagnostics,
) -> ParticleSet {
    if !set.normalize() {
        diag.deprivation = true;
        set.reset_uniform_weights();
    }
    let threshold = target as f64 / 2.0;
    let resample = force_resample
        || set.len() != target
        || match models.resample {
            ResamplePolicy::Always => true,
            ResamplePolicy::EffectiveSampleSize => super::effective_sample_size(&set) < threshold,
        };
    if resample {
        diag.resampled = true;
        set = resample_systematic_to(&set, target, rng);
    }
    set
}

/// Reweight forward-simulated offsets by the full contact likelihood.
fn conventional_update<R: Rng + ?Sized>(
    prior: &ParticleSet,
    propagated: Vec<DVector<f64>>,
    z: &Observation,
    models: &FilterModels,
    rng: &mut R,
    diag: &mut StepDiagnostics,
) -> ParticleSet {
    let world = &models.world;
    let sigma = models.observation.sigma_c;
    let likelihoods =
        map_indexed(propagated.len(), |i| contact_likelihood(&z.contact, &(&z.encoder + &propagated[i]), world, sigma));
    let particles = prior
        .particles()
        .iter()
        .zip(propagated)
        .zip(likelihoods)
        .map(|((p, offset), l)| Particle { offset, weight: p.weight * l })
        .collect();
    finish(ParticleSet::weighted(particles), models.particles, false, models, rng, diag)
}

/// One conventional particle filter update.
pub fn cpf_step<R: Rng + ?Sized>(
    set: &ParticleSet,
    command: &DVector<f64>,
    encoder_prev: &DVector<f64>,
    z: &Observation,
    models: &FilterModels,
    rng: &mut R,
) -> (ParticleSet, StepDiagnostics) {
    let mut diag = StepDiagnostics { contact: !z.contact.is_clear(), ..Default::default() };
    let clock = Stopwatch::start();
    let propagated = propagate(set, command, encoder_prev, &z.encoder, models, rng.random());
    diag.transition_time = clock.elapsed();
    let clock = Stopwatch::start();
    let out = conventional_update(set, propagated, z, models, rng, &mut diag);
    diag.observation_time = clock.elapsed();
    (out, diag)
}

/// One manifold particle filter update. Without contact this is exactly
/// [`cpf_step`].
pub fn mpf_step<R: Rng + ?Sized>(
    set: &ParticleSet,
    command: &DVector<f64>,
    encoder_prev: &DVector<f64>,
    z: &Observation,
    strategy: Strategy,
    models: &FilterModels,
    rng: &mut R,
) -> (ParticleSet, StepDiagnostics) {
    if z.contact.is_clear() {
        return cpf_step(set, command, encoder_prev, z, models, rng);
    }
    let mut diag = StepDiagnostics { contact: true, ..Default::default() };
    let clock = Stopwatch::start();
    let propagated = propagate(set, command, encoder_prev, &z.encoder, models, rng.random());
    diag.transition_time = clock.elapsed();

    let clock = Stopwatch::start();
    let world = &models.world;
    let forward = ParticleSet::weighted(
        set.particles()
            .iter()
            .zip(&propagated)
            .map(|(p, offset)| Particle { offset: offset.clone(), weight: p.weight })
            .collect(),
    );
    let kde = Kde::fit(&forward, &models.kde);
    let k = models.particles;
    let previous = || set.configurations(&z.encoder);
    let batch: SampleBatch = match strategy {
        Strategy::Uniform => sample_uniform_projection(world, &z.contact, k, &models.projection, rng),
        Strategy::Particle => sample_particle_projection(world, &z.contact, &previous(), &models.projection),
        Strategy::Ball => {
            let radius = ball_radius(command, &models.transition, kde.max_bandwidth());
            sample_ball_projection(world, &z.contact, &previous(), radius, k, &models.projection, rng)
        }
    };
    diag.shortfall = batch.shortfall();

    let out = if batch.configs.is_empty() {
        diag.fallback = true;
        conventional_update(set, propagated, z, models, rng, &mut diag)
    } else {
        let sigma = models.observation.sigma_c;
        let inactive = models.inactive_factor;
        let configs = batch.configs;
        // Weights are formed in the log domain and scaled by the largest one:
        // a tightly collapsed forward set would otherwise underflow every
        // kernel and trigger a spurious uniform reset.
        let scored = map_indexed(configs.len(), |i| {
            let offset = &configs[i] - &z.encoder;
            let mut log_weight = kde.log_density(&offset);
            if inactive {
                log_weight += log_inactive_likelihood(&z.contact, &configs[i], world, sigma);
            }
            (offset, log_weight)
        });
        let top = scored.iter().map(|(_, lw)| *lw).fold(f64::NEG_INFINITY, f64::max);
        let particles = scored
            .into_iter()
            .map(|(offset, lw)| Particle { offset, weight: if top.is_finite() { (lw - top).exp() } else { 0.0 } })
            .collect();
        finish(ParticleSet::weighted(particles), k, diag.shortfall > 0, models, rng, &mut diag)
    };
    diag.observation_time = clock.elapsed();
    (out, diag)
}

/// A running filter: particle set, last encoder reading, and its own
/// random stream.
#[derive(Clone, Debug)]
pub struct ParticleFilter {
    kind: FilterKind,
    models: FilterModels,
    set: ParticleSet,
    encoder: DVector<f64>,
    rng: SimRng,
}

impl ParticleFilter {
    /// Draw the initial belief from the offset prior.
    pub fn new(
        kind: FilterKind,
        models: FilterModels,
        encoder: DVector<f64>,
        unobserved: &UnobservedPrior,
        seed: u64,
    ) -> Self {
        let mut rng = seeded(seed);
        let set = init_belief(&models.observation, models.particles, unobserved, &mut rng);
        ParticleFilter { kind, models, set, encoder, rng }
    }

    pub fn with_particles(
        kind: FilterKind,
        models: FilterModels,
        encoder: DVector<f64>,
        set: ParticleSet,
        seed: u64,
    ) -> Self {
        ParticleFilter { kind, models, set, encoder, rng: seeded(seed) }
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.set
    }

    pub fn encoder(&self) -> &DVector<f64> {
        &self.encoder
    }

    pub fn models(&self) -> &FilterModels {
        &self.models
    }

    /// Advance by one command and incorporate the observation taken after it.
    pub fn step(&mut self, command: &DVector<f64>, z: &Observation) -> StepDiagnostics {
        let (set, diag) = match self.kind {
            FilterKind::Conventional => cpf_step(&self.set, command, &self.encoder, z, &self.models, &mut self.rng),
            FilterKind::Manifold(s) => mpf_step(&self.set, command, &self.encoder, z, s, &self.models, &mut self.rng),
        };
        self.set = set;
        self.encoder = z.encoder.clone();
        diag
    }

    pub fn w_rmse(&self, q_true: &Configuration) -> f64 {
        super::w_rmse(&self.set, q_true, &self.encoder)
    }
}
