use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use super::Simulation;
use crate::filter::{FilterKind, ParticleFilter, StepDiagnostics, Strategy};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Cpf,
    MpfUniform,
    MpfParticle,
    MpfBall,
    /// Holds a single particle at the true offset; validates the harness.
    Oracle,
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown estimator {name:?} (valid: cpf, mpf-uniform, mpf-particle, mpf-ball, oracle)")]
pub struct UnknownEstimator {
    pub name: String,
}

impl Estimator {
    /// The four filters compared in the benchmark; the oracle is extra.
    pub const STANDARD: [Estimator; 4] =
        [Estimator::Cpf, Estimator::MpfUniform, Estimator::MpfParticle, Estimator::MpfBall];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Cpf => "cpf",
            Estimator::MpfUniform => "mpf-uniform",
            Estimator::MpfParticle => "mpf-particle",
            Estimator::MpfBall => "mpf-ball",
            Estimator::Oracle => "oracle",
        }
    }

    /// Display label in tables.
    pub fn label(self) -> &'static str {
        match self {
            Estimator::Cpf => "CPF",
            Estimator::MpfUniform => "MPF-Uniform",
            Estimator::MpfParticle => "MPF-Particle",
            Estimator::MpfBall => "MPF-Ball",
            Estimator::Oracle => "Oracle",
        }
    }

    pub fn kind(self) -> Option<FilterKind> {
        match self {
            Estimator::Cpf => Some(FilterKind::Conventional),
            Estimator::MpfUniform => Some(FilterKind::Manifold(Strategy::Uniform)),
            Estimator::MpfParticle => Some(FilterKind::Manifold(Strategy::Particle)),
            Estimator::MpfBall => Some(FilterKind::Manifold(Strategy::Ball)),
            Estimator::Oracle => None,
        }
    }

    /// Stream id for this estimator's random draws. Fixed per estimator so
    /// its results do not depend on which others run alongside it.
    fn stream_id(self) -> u64 {
        match self {
            Estimator::Cpf => 1,
            Estimator::MpfUniform => 2,
            Estimator::MpfParticle => 3,
            Estimator::MpfBall => 4,
            Estimator::Oracle => 5,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = UnknownEstimator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "cpf" => Ok(Estimator::Cpf),
            "mpf-uniform" => Ok(Estimator::MpfUniform),
            "mpf-particle" => Ok(Estimator::MpfParticle),
            "mpf-ball" => Ok(Estimator::MpfBall),
            "oracle" => Ok(Estimator::Oracle),
            other => Err(UnknownEstimator { name: other.to_string() }),
        }
    }
}

/// One estimator's result for one timestep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepRecord {
    pub wrmse: f64,
    pub transition_ms: f64,
    pub observation_ms: f64,
    pub deprivation: bool,
    pub resampled: bool,
    pub shortfall: usize,
    pub fallback: bool,
}

impl StepRecord {
    fn from_diagnostics(wrmse: f64, d: &StepDiagnostics) -> Self {
        StepRecord {
            wrmse,
            transition_ms: d.transition_time.as_secs_f64() * 1e3,
            observation_ms: d.observation_time.as_secs_f64() * 1e3,
            deprivation: d.deprivation,
            resampled: d.resampled,
            shortfall: d.shortfall,
            fallback: d.fallback,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialTrace {
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    /// Whether any sensor read contact after each step.
    pub contact: Vec<bool>,
    /// `records[e][t]` for estimator `estimators[e]` after step `t`.
    pub records: Vec<Vec<StepRecord>>,
}

impl TrialTrace {
    pub fn len(&self) -> usize {
        self.contact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contact.is_empty()
    }

    pub fn index_of(&self, e: Estimator) -> Option<usize> {
        self.estimators.iter().position(|x| *x == e)
    }

    pub fn wrmse(&self, e: Estimator) -> Option<Vec<f64>> {
        self.index_of(e).map(|i| self.records[i].iter().map(|r| r.wrmse).collect())
    }

    pub fn final_wrmse(&self, e: Estimator) -> Option<f64> {
        self.index_of(e).and_then(|i| self.records[i].last().map(|r| r.wrmse))
    }

    /// Mean W-RMSE over the timesteps of this trial that sensed contact, or
    /// `None` if the trial never touched.
    pub fn contact_mean_wrmse(&self, e: Estimator) -> Option<f64> {
        let i = self.index_of(e)?;
        let values: Vec<f64> =
            self.records[i].iter().zip(&self.contact).filter(|(_, c)| **c).map(|(r, _)| r.wrmse).collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }

    pub fn deprivation_events(&self, e: Estimator) -> usize {
        self.index_of(e).map_or(0, |i| self.records[i].iter().filter(|r| r.deprivation).count())
    }
}

#[allow(clippy::large_enum_variant)]
enum Runner {
    Filter(ParticleFilter),
    Oracle,
}

/// Simulate one trial: draw the truth, give every estimator an independent
/// draw from the same prior, then step truth and estimators in lockstep on
/// identical observations.
pub fn run_trial(sim: &Simulation, estimators: &[Estimator], seed: u64) -> TrialTrace {
    let mut truth_rng = stream(seed, 0);
    let mut truth = sim.initial_truth(&mut truth_rng);
    let models = sim.models();
    let mut runners: Vec<Runner> = estimators
        .iter()
        .map(|&e| match e.kind() {
            Some(kind) => {
                let filter_seed = stream(seed, e.stream_id()).random::<u64>();
                Runner::Filter(ParticleFilter::new(
                    kind,
                    models.clone(),
                    truth.encoder.clone(),
                    &sim.scenario.unobserved,
                    filter_seed,
                ))
            }
            None => Runner::Oracle,
        })
        .collect();

    let steps = sim.scenario.script.len();
    let mut contact = Vec::with_capacity(steps);
    let mut records = vec![Vec::with_capacity(steps); estimators.len()];
    for u in sim.scenario.script.commands() {
        truth = sim.step_truth(&truth, u, &mut truth_rng);
        let z = sim.observe(&truth);
        contact.push(!z.contact.is_clear());
        for (runner, out) in runners.iter_mut().zip(records.iter_mut()) {
            out.push(match runner {
                Runner::Filter(f) => {
                    let diag = f.step(u, &z);
                    StepRecord::from_diagnostics(f.w_rmse(&truth.q_true), &diag)
                }
                Runner::Oracle => {
                    let oracle = crate::filter::ParticleSet::uniform(vec![truth.offset()]);
                    StepRecord {
                        wrmse: crate::filter::w_rmse(&oracle, &truth.q_true, &truth.encoder),
                        ..Default::default()
                    }
                }
            });
        }
    }
    TrialTrace { seed, estimators: estimators.to_vec(), contact, records }
}
