use nalgebra::DVector;

use super::{Eval, Objective, ProjectionSettings};
use crate::kinematics::{ChainModel, Configuration};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescentStop {
    /// The stopping predicate held.
    Reached,
    /// An accepted step was shorter than the step tolerance.
    StepTooSmall,
    /// No step size within the retry budget avoided an increase.
    NoDescent,
    IterationCap,
    OutOfWorkspace,
}

/// Initial step length of each iteration before backtracking.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum StepRule {
    /// The configured learning rate.
    Fixed,
    /// `scale * f / |∇f|^2`; with `scale = 2` this is a Newton step on the
    /// root of a single squared residual.
    Polyak { scale: f64 },
}

#[derive(Clone, Debug)]
pub struct DescentReport {
    pub q: Configuration,
    pub value: f64,
    pub worst: f64,
    pub iterations: usize,
    pub stop: DescentStop,
}

/// Backtracking gradient descent. The objective sequence of accepted iterates
/// never increases. When `limits` is given every iterate is clamped into the
/// joint limits. With `strict_bounds`, leaving the distance-field bounds is a
/// failure (and candidate steps that leave are shrunk).
#[allow(clippy::too_many_arguments)]
pub(crate) fn descend<O: Objective>(
    objective: &O,
    start: Configuration,
    settings: &ProjectionSettings,
    rule: StepRule,
    limits: Option<&ChainModel>,
    strict_bounds: bool,
    reached: impl Fn(&Eval) -> bool,
    mut trace: Option<&mut Vec<f64>>,
) -> DescentReport {
    let mut q = start;
    if let Some(chain) = limits {
        chain.clamp_to_limits(&mut q);
    }
    let mut current = objective.eval(q.as_slice());
    let report = |q: Configuration, e: &Eval, iterations: usize, stop: DescentStop| DescentReport {
        q,
        value: e.value,
        worst: e.worst,
        iterations,
        stop,
    };
    if let Some(t) = trace.as_deref_mut() {
        t.push(current.value);
    }
    if strict_bounds && current.out_of_bounds {
        return report(q, &current, 0, DescentStop::OutOfWorkspace);
    }
    if reached(&current) {
        return report(q, &current, 0, DescentStop::Reached);
    }

    let n = q.len();
    let mut grad = DVector::zeros(n);
    let mut candidate = DVector::zeros(n);
    for iteration in 1..=settings.max_iterations {
        objective.gradient(q.as_slice(), grad.as_mut_slice());
        let mut step = match rule {
            StepRule::Fixed => settings.learning_rate,
            StepRule::Polyak { scale } => {
                let g2 = grad.norm_squared();
                if g2 > 0.0 {
                    scale * current.value / g2
                } else {
                    settings.learning_rate
                }
            }
        };
        let mut accepted = None;
        for _ in 0..=settings.max_retries {
            candidate.copy_from(&q);
            candidate.axpy(-step, &grad, 1.0);
            if let Some(chain) = limits {
                chain.clamp_to_limits(&mut candidate);
            }
            let e = objective.eval(candidate.as_slice());
            if e.value <= current.value && !(strict_bounds && e.out_of_bounds) {
                accepted = Some(e);
                break;
            }
            step *= settings.backtracking_factor;
        }
        let Some(e) = accepted else {
            return report(q, &current, iteration, DescentStop::NoDescent);
        };
        let moved = (&candidate - &q).norm();
        std::mem::swap(&mut q, &mut candidate);
        current = e;
        if let Some(t) = trace.as_deref_mut() {
            t.push(current.value);
        }
        if reached(&current) {
            return report(q, &current, iteration, DescentStop::Reached);
        }
        if moved < settings.step_tolerance {
            return report(q, &current, iteration, DescentStop::StepTooSmall);
        }
    }
    report(q, &current, settings.max_iterations, DescentStop::IterationCap)
}
