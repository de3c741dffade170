use std::fmt::Write;
use std::path::Path;

use mpf::filter::{Bandwidth, ResamplePolicy};
use mpf::scenario::{Scenario, Simulation};

use crate::Failure;

fn covariance(diag: &[f64]) -> String {
    if diag.iter().all(|v| *v == diag[0]) {
        format!("{:?}·I", diag[0])
    } else {
        format!("diag({})", diag.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", "))
    }
}

pub fn describe(s: &Scenario, sdf_shape: [usize; 3]) -> String {
    let mut out = String::new();
    let n = s.chain.n_joints();
    let p = &s.projection;
    let rows: Vec<(&str, String)> = vec![
        ("scenario", s.name.clone()),
        ("joints", n.to_string()),
        ("workspace dimension", s.chain.dim().arity().to_string()),
        ("contact sensors", s.sensors.len().to_string()),
        ("collision bodies", s.bodies.len().to_string()),
        ("environment primitives", s.environment.len().to_string()),
        ("sdf resolution (m)", format!("{:?}", s.resolution)),
        ("sdf grid", format!("{} x {} x {}", sdf_shape[0], sdf_shape[1], sdf_shape[2])),
        ("script steps", s.script.len().to_string()),
        ("dt (s)", format!("{:?}", s.transition.dt)),
        ("particles k", s.particles.to_string()),
        ("Σ_Δq", covariance(s.observation.offset_variance.as_slice())),
        ("r_a (rad/s)", format!("{:?}", s.transition.r_a)),
        ("sigma_c (m)", format!("{:?}", s.observation.sigma_c)),
        ("contact threshold δ (m)", format!("{:?}", s.contact_threshold)),
        (
            "unobserved joints",
            match s.unobserved.observed.iter().filter(|o| !**o).count() {
                0 => "none".to_string(),
                _ => format!(
                    "{:?} (prior ball radius {:?})",
                    (0..n).filter(|&j| !s.unobserved.observed[j]).collect::<Vec<_>>(),
                    s.unobserved.radius
                ),
            },
        ),
        ("projection learning rate", format!("{:?}", p.learning_rate)),
        ("projection max iterations", p.max_iterations.to_string()),
        ("manifold tolerance ε_d (m^2)", format!("{:e}", p.manifold_tolerance)),
        ("step tolerance", format!("{:e}", p.step_tolerance)),
        ("max step halvings", p.max_retries.to_string()),
        ("backtracking factor", format!("{:?}", p.backtracking_factor)),
        (
            "kde bandwidth",
            match &s.kde.bandwidth {
                Bandwidth::Silverman => "silverman".to_string(),
                Bandwidth::Fixed(h) => format!("{:?}", h.as_slice()),
            },
        ),
        ("kde bandwidth floor", format!("{:?}", s.kde.floor)),
        (
            "resampling",
            match s.resample {
                ResamplePolicy::EffectiveSampleSize => "when ESS < k/2".to_string(),
                ResamplePolicy::Always => "every step".to_string(),
            },
        ),
        ("inactive-sensor factor", s.inactive_factor.to_string()),
    ];
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    for (k, v) in rows {
        let pad = width - k.chars().count();
        let _ = writeln!(out, "{k}{}  {v}", " ".repeat(pad));
    }
    out
}

pub fn run(scenario: &Path) -> Result<(), Failure> {
    let sim = Simulation::load(scenario)?;
    print!("{}", describe(&sim.scenario, sim.world.sdf.shape()));
    println!("valid");
    Ok(())
}
