use super::trial::{run_trial, Estimator, TrialTrace};
use super::Simulation;
use crate::stats::{mean, mean_ci95, Summary};

/// Aggregate of one estimator at one timestep over all trials.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSummary {
    /// 1-based timestep.
    pub timestep: usize,
    pub estimator: Estimator,
    pub mean_wrmse: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fraction of trials sensing contact at this step.
    pub contact_fraction: f64,
    pub transition_ms: f64,
    pub observation_ms: f64,
}

/// Per-step wall time over the contact steps of every trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub estimator: Estimator,
    pub total: Summary,
    pub transition: Summary,
    pub observation: Summary,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub estimators: Vec<Estimator>,
    pub trials: Vec<TrialTrace>,
    /// Timestep-major, then estimator order.
    pub rows: Vec<StepSummary>,
    /// A step is shaded when any trial sensed contact at it.
    pub shaded: Vec<bool>,
    pub timing: Vec<TimingRow>,
}

impl ExperimentReport {
    pub fn steps(&self) -> usize {
        self.shaded.len()
    }

    pub fn deprivation_events(&self, e: Estimator) -> usize {
        self.trials.iter().map(|t| t.deprivation_events(e)).sum()
    }
}

/// Run `n_trials` trials with seeds `base_seed + i` on up to `workers`
/// threads and aggregate them. The result does not depend on `workers`.
pub fn run_experiment(
    sim: &Simulation,
    estimators: &[Estimator],
    n_trials: usize,
    base_seed: u64,
    workers: usize,
) -> ExperimentReport {
    assert!(n_trials >= 1, "need at least one trial");
    let run = || crate::rng::map_indexed(n_trials, |i| run_trial(sim, estimators, base_seed.wrapping_add(i as u64)));
    #[cfg(feature = "parallel")]
    let trials = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    #[cfg(not(feature = "parallel"))]
    let trials = {
        let _ = workers;
        run()
    };
    aggregate(estimators, trials)
}

pub(crate) fn aggregate(estimators: &[Estimator], trials: Vec<TrialTrace>) -> ExperimentReport {
    let steps = trials[0].len();
    let n = trials.len() as f64;
    let shaded: Vec<bool> = (0..steps).map(|t| trials.iter().any(|tr| tr.contact[t])).collect();
    let mut rows = Vec::with_capacity(steps * estimators.len());
    for t in 0..steps {
        let contact_fraction = trials.iter().filter(|tr| tr.contact[t]).count() as f64 / n;
        for (e, &est) in estimators.iter().enumerate() {
            let wrmse: Vec<f64> = trials.iter().map(|tr| tr.records[e][t].wrmse).collect();
            let (ci_low, ci_high) = mean_ci95(&wrmse);
            let transition: Vec<f64> = trials.iter().map(|tr| tr.records[e][t].transition_ms).collect();
            let observation: Vec<f64> = trials.iter().map(|tr| tr.records[e][t].observation_ms).collect();
            rows.push(StepSummary {
                timestep: t + 1,
                estimator: est,
                mean_wrmse: mean(&wrmse),
                ci_low,
                ci_high,
                contact_fraction,
                transition_ms: mean(&transition),
                observation_ms: mean(&observation),
            });
        }
    }
    let timing = estimators
        .iter()
        .enumerate()
        .map(|(e, &est)| {
            let contact_steps =
                trials.iter().flat_map(|tr| tr.records[e].iter().zip(&tr.contact).filter(|(_, c)| **c).map(|(r, _)| r));
            let (mut tr, mut ob, mut tot) = (Vec::new(), Vec::new(), Vec::new());
            for r in contact_steps {
                tr.push(r.transition_ms);
                ob.push(r.observation_ms);
                tot.push(r.transition_ms + r.observation_ms);
            }
            TimingRow {
                estimator: est,
                total: Summary::of(&tot),
                transition: Summary::of(&tr),
                observation: Summary::of(&ob),
            }
        })
        .collect();
    ExperimentReport { estimators: estimators.to_vec(), trials, rows, shaded, timing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::StepRecord;

    fn trace(seed: u64, wrmse: &[f64], contact: &[bool]) -> TrialTrace {
        TrialTrace {
            seed,
            estimators: vec![Estimator::Cpf],
            contact: contact.to_vec(),
            records: vec![wrmse.iter().map(|&w| StepRecord { wrmse: w, ..Default::default() }).collect()],
        }
    }

    #[test]
    fn constant_traces_average_to_the_constant() {
        let trials = (0..5).map(|s| trace(s, &[0.4, 0.4, 0.4], &[false, s == 2, false])).collect();
        let r = aggregate(&[Estimator::Cpf], trials);
        assert_eq!(r.rows.len(), 3);
        for row in &r.rows {
            assert!((row.mean_wrmse - 0.4).abs() < 1e-15);
            assert!((row.ci_high - row.ci_low).abs() < 1e-12);
        }
        assert_eq!(r.shaded, vec![false, true, false]);
        assert!((r.rows[1].contact_fraction - 0.2).abs() < 1e-15);
        assert_eq!(r.timing[0].total.count, 1);
    }

    #[test]
    fn single_trial_has_zero_ci_width() {
        let r = aggregate(&[Estimator::Cpf], vec![trace(0, &[0.1, 0.7], &[true, true])]);
        assert!(r.rows.iter().all(|row| row.ci_low == row.ci_high));
    }
}
