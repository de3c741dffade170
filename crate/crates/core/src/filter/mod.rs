//! Particle filters over the encoder offset `Δq`, with `q = q_e + Δq`.
//!
//! [`cpf_step`] is the conventional sample-from-transition, weight-by-
//! observation filter. [`mpf_step`] shares that branch while no contact is
//! sensed; on contact it samples particles from the contact manifold and
//! weights them by a kernel density estimate of the forward-simulated
//! previous set.

mod kde;
mod step;

pub use kde::{kde_weight, Bandwidth, Kde, KdeSettings};
pub use step::{
    ball_radius, contact_likelihood, cpf_step, inactive_likelihood, mpf_step, transition_sample, FilterKind,
    FilterModels, ParticleFilter, ResamplePolicy, StepDiagnostics, Strategy, LIKELIHOOD_FLOOR,
};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::kinematics::Configuration;
use crate::manifold::{uniform_in_ball, ContactVector};

/// One offset hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub offset: DVector<f64>,
    pub weight: f64,
}

/// Weighted set of offset hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    normalized: bool,
}

impl ParticleSet {
    /// Equal weights `1/k`.
    pub fn uniform(offsets: Vec<DVector<f64>>) -> Self {
        assert!(!offsets.is_empty(), "a particle set needs at least one particle");
        let w = 1.0 / offsets.len() as f64;
        ParticleSet {
            particles: offsets.into_iter().map(|offset| Particle { offset, weight: w }).collect(),
            normalized: true,
        }
    }

    /// Arbitrary nonnegative weights; not normalized.
    pub fn weighted(particles: Vec<Particle>) -> Self {
        assert!(!particles.is_empty(), "a particle set needs at least one particle");
        ParticleSet { particles, normalized: false }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// Scale weights to sum to one. Returns `false` (leaving the set
    /// untouched) when the weights sum to zero or are not finite.
    pub fn normalize(&mut self) -> bool {
        let total = self.weight_sum();
        if !(total > 0.0 && total.is_finite()) {
            return false;
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        self.normalized = true;
        true
    }

    pub fn reset_uniform_weights(&mut self) {
        let w = 1.0 / self.len() as f64;
        for p in &mut self.particles {
            p.weight = w;
        }
        self.normalized = true;
    }

    /// Full configurations `q_e + Δq`.
    pub fn configurations(&self, encoder: &DVector<f64>) -> Vec<Configuration> {
        self.particles.iter().map(|p| encoder + &p.offset).collect()
    }

    /// Weighted mean offset.
    pub fn mean_offset(&self) -> DVector<f64> {
        let total = self.weight_sum();
        let mut mean = DVector::zeros(self.particles[0].offset.len());
        for p in &self.particles {
            mean.axpy(p.weight / total, &p.offset, 1.0);
        }
        mean
    }
}

/// Encoder reading plus contact bits. `encoder` always has full length `n`;
/// entries of unobserved joints are zero, so for those joints the offset
/// carries the whole angle.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub encoder: DVector<f64>,
    pub observed: Vec<bool>,
    pub contact: ContactVector,
}

impl Observation {
    pub fn full(encoder: DVector<f64>, contact: ContactVector) -> Self {
        let observed = vec![true; encoder.len()];
        Observation { encoder, observed, contact }
    }

    /// Build from readings of only the observed joints.
    pub fn partial(readings: &[f64], observed: Vec<bool>, contact: ContactVector) -> Self {
        assert_eq!(
            readings.len(),
            observed.iter().filter(|o| **o).count(),
            "readings must cover exactly the observed joints"
        );
        let mut it = readings.iter();
        let encoder =
            DVector::from_iterator(observed.len(), observed.iter().map(|&o| if o { *it.next().unwrap() } else { 0.0 }));
        Observation { encoder, observed, contact }
    }
}

/// Execution noise: the commanded velocity is perturbed by a uniform sample
/// from a ball of radius `r_a` (rad/s) and integrated over `dt` seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionNoise {
    pub r_a: f64,
    pub dt: f64,
}

/// Initial offset prior and contact-likelihood scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationNoise {
    /// Diagonal of `Σ_Δq` (rad^2).
    pub offset_variance: DVector<f64>,
    /// Contact pseudo-likelihood length scale (m).
    pub sigma_c: f64,
}

/// Prior for joints without encoders: uniform over a ball (rad) spanning the
/// unobserved dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct UnobservedPrior {
    pub observed: Vec<bool>,
    pub radius: f64,
}

impl UnobservedPrior {
    pub fn all_observed(n: usize) -> Self {
        UnobservedPrior { observed: vec![true; n], radius: 0.0 }
    }
}

/// Sample `k` offsets from the prior with equal weights.
pub fn init_belief<R: Rng + ?Sized>(
    prior: &ObservationNoise,
    k: usize,
    unobserved: &UnobservedPrior,
    rng: &mut R,
) -> ParticleSet {
    assert!(k >= 1, "need at least one particle");
    let n = prior.offset_variance.len();
    assert_eq!(unobserved.observed.len(), n, "observation mask has the wrong length");
    let normals: Vec<Normal<f64>> = prior
        .offset_variance
        .iter()
        .map(|v| Normal::new(0.0, v.sqrt()).expect("variance must be nonnegative"))
        .collect();
    let hidden: Vec<usize> = (0..n).filter(|&d| !unobserved.observed[d]).collect();
    let offsets = (0..k)
        .map(|_| {
            let mut dq = DVector::zeros(n);
            for d in 0..n {
                if unobserved.observed[d] {
                    dq[d] = normals[d].sample(rng);
                }
            }
            if !hidden.is_empty() {
                let ball = uniform_in_ball(hidden.len(), unobserved.radius, rng);
                for (slot, &d) in hidden.iter().enumerate() {
                    dq[d] = ball[slot];
                }
            }
            dq
        })
        .collect();
    ParticleSet::uniform(offsets)
}

/// `1 / Σ w^2` of the normalized weights.
pub fn effective_sample_size(set: &ParticleSet) -> f64 {
    let total = set.weight_sum();
    let sq: f64 = set.particles.iter().map(|p| (p.weight / total).powi(2)).sum();
    1.0 / sq
}

/// Systematic resampling to the same particle count.
pub fn resample_systematic<R: Rng + ?Sized>(set: &ParticleSet, rng: &mut R) -> ParticleSet {
    resample_systematic_to(set, set.len(), rng)
}

/// Systematic resampling: one uniform offset, `count` evenly spaced
/// pointers through the cumulative weights. Output weights are uniform.
///
/// Panics if every weight is zero.
pub fn resample_systematic_to<R: Rng + ?Sized>(set: &ParticleSet, count: usize, rng: &mut R) -> ParticleSet {
    let total = set.weight_sum();
    assert!(total > 0.0 && total.is_finite(), "cannot resample a set whose weights sum to {total}");
    assert!(count >= 1);
    let last_positive = set.particles.iter().rposition(|p| p.weight > 0.0).unwrap();
    let spacing = 1.0 / count as f64;
    let mut pointer = rng.random::<f64>() * spacing;
    let mut cumulative = set.particles[0].weight / total;
    let mut j = 0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        while cumulative < pointer && j < last_positive {
            j += 1;
            cumulative += set.particles[j].weight / total;
        }
        out.push(set.particles[j].offset.clone());
        pointer += spacing;
    }
    ParticleSet::uniform(out)
}

/// Weighted root mean square configuration error against the truth.
pub fn w_rmse(set: &ParticleSet, q_true: &Configuration, encoder: &DVector<f64>) -> f64 {
    let total = set.weight_sum();
    let sum: f64 = set.particles.iter().map(|p| p.weight * (encoder + &p.offset - q_true).norm_squared()).sum();
    (sum / total).sqrt()
}
