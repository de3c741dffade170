//! Three ways to pick projection initializations: uniformly over the joint
//! limits, the previous particles themselves, and uniformly over the union of
//! balls around the previous particles.

use std::collections::HashSet;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{project, ContactVector, ProjectionSettings};
use crate::kinematics::Configuration;
use crate::rng::{map_indexed, stream, SimRng};
use crate::world::World;

/// Attempts allowed per requested sample.
pub const ATTEMPTS_PER_SAMPLE: usize = 50;

/// Projected configurations plus bookkeeping for shortfall diagnostics.
#[derive(Clone, Debug, Default)]
pub struct SampleBatch {
    pub configs: Vec<Configuration>,
    pub requested: usize,
    pub attempts: usize,
}

impl SampleBatch {
    pub fn shortfall(&self) -> usize {
        self.requested.saturating_sub(self.configs.len())
    }
}

/// Draw initializations uniformly within the joint limits and project them
/// until `n` succeed or `50 n` attempts are spent.
pub fn sample_uniform_projection<R: Rng + ?Sized>(
    world: &World,
    c: &ContactVector,
    n: usize,
    settings: &ProjectionSettings,
    rng: &mut R,
) -> SampleBatch {
    let limits = world.chain.limits();
    gather(world, c, n, settings, rng.random(), |rng| {
        DVector::from_iterator(limits.len(), limits.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)))
    })
}

/// Project every previous configuration once; failures are dropped.
pub fn sample_particle_projection(
    world: &World,
    c: &ContactVector,
    previous: &[Configuration],
    settings: &ProjectionSettings,
) -> SampleBatch {
    assert!(!previous.is_empty(), "particle projection needs a non-empty previous set");
    let projected = map_indexed(previous.len(), |i| project(world, &previous[i], c, settings).converged());
    let configs: Vec<_> = projected.into_iter().flatten().collect();
    debug_assert!(configs.iter().all(|q| super::loss(world, q, c).value < settings.manifold_tolerance));
    SampleBatch { configs, requested: previous.len(), attempts: previous.len() }
}

/// Draw initializations uniformly from the union of radius-`radius` balls
/// around `previous` and project them, under the same attempt budget as the
/// uniform sampler.
pub fn sample_ball_projection<R: Rng + ?Sized>(
    world: &World,
    c: &ContactVector,
    previous: &[Configuration],
    radius: f64,
    n: usize,
    settings: &ProjectionSettings,
    rng: &mut R,
) -> SampleBatch {
    assert!(!previous.is_empty(), "ball projection needs a non-empty previous set");
    assert!(radius > 0.0, "ball radius must be positive");
    // resampled copies do not change the union, only slow the rejection step
    let mut seen = HashSet::with_capacity(previous.len());
    let centers: Vec<Configuration> =
        previous.iter().filter(|q| seen.insert(q.iter().map(|x| x.to_bits()).collect::<Vec<u64>>())).cloned().collect();
    gather(world, c, n, settings, rng.random(), |rng| ball_initialization(&centers, radius, rng).1)
}

/// One uniform draw from the union of open balls: choose a center uniformly,
/// draw uniformly inside its ball, and keep the point only if no
/// lower-indexed ball contains it. That keeps it with probability
/// `1 / (number of balls containing it)`, which flattens the overlap.
/// Returns the chosen center's index with the point.
pub fn ball_initialization<R: Rng + ?Sized>(
    centers: &[Configuration],
    radius: f64,
    rng: &mut R,
) -> (usize, Configuration) {
    let r2 = radius * radius;
    loop {
        let j = rng.random_range(0..centers.len());
        let x = &centers[j] + uniform_in_ball(centers[j].len(), radius, rng);
        let shadowed = centers[..j].iter().any(|c| (c - &x).norm_squared() < r2);
        if !shadowed {
            return (j, x);
        }
    }
}

/// Uniform sample from the centered ball of the given radius in `R^dim`.
pub fn uniform_in_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> DVector<f64> {
    if dim == 0 || radius == 0.0 {
        return DVector::zeros(dim);
    }
    loop {
        let v = DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let norm = v.norm();
        if norm > 0.0 {
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            return v * (r / norm);
        }
    }
}

/// Run attempts in deterministic batches until `n` converge or the budget is
/// spent. Attempt `i` always uses stream `i` under `seed`, and successes are
/// kept in attempt order, so the result does not depend on worker count.
fn gather<F>(
    world: &World,
    c: &ContactVector,
    n: usize,
    settings: &ProjectionSettings,
    seed: u64,
    draw: F,
) -> SampleBatch
where
    F: Fn(&mut SimRng) -> Configuration + Sync + Send,
{
    let budget = ATTEMPTS_PER_SAMPLE * n;
    let mut batch = SampleBatch { configs: Vec::with_capacity(n), requested: n, attempts: 0 };
    while batch.configs.len() < n && batch.attempts < budget {
        let remaining = n - batch.configs.len();
        let rate =
            if batch.attempts == 0 { 1.0 } else { (batch.configs.len() as f64 / batch.attempts as f64).max(0.05) };
        let size = ((remaining as f64 / rate).ceil() as usize).clamp(1, budget - batch.attempts);
        let first = batch.attempts;
        let results = map_indexed(size, |i| {
            let mut rng = stream(seed, (first + i) as u64);
            let start = draw(&mut rng);
            project(world, &start, c, settings).converged()
        });
        batch.attempts += size;
        for q in results.into_iter().flatten() {
            if batch.configs.len() == n {
                break;
            }
            batch.configs.push(q);
        }
    }
    debug_assert!(batch.configs.iter().all(|q| super::loss(world, q, c).value < settings.manifold_tolerance));
    batch
}
