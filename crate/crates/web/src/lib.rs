//! Browser bindings for the 2-DOF demo: a distance-field slice, contact
//! manifold samples and side-by-side filter stepping on the shipped scenario.

use mpf::filter::{FilterKind, ParticleFilter, Strategy};
use mpf::manifold::{sample_uniform_projection, ContactVector};
use mpf::rng::{seeded, stream, SimRng};
use mpf::scenario::{Scenario, Simulation, TruthState};
use rand::Rng;
use wasm_bindgen::prelude::*;

const SCENARIO: &str = include_str!("../../../scenarios/planar_2dof.toml");
const SCRIPT: &str = include_str!("../../../scenarios/planar_2dof.script");

/// Filters in display order.
const KINDS: [FilterKind; 4] = [
    FilterKind::Conventional,
    FilterKind::Manifold(Strategy::Uniform),
    FilterKind::Manifold(Strategy::Particle),
    FilterKind::Manifold(Strategy::Ball),
];

fn simulation() -> Result<Simulation, JsError> {
    let scenario = Scenario::from_toml_and_script(SCENARIO, SCRIPT).map_err(|e| JsError::new(&e.to_string()))?;
    Simulation::new(scenario).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub struct Demo {
    sim: Simulation,
    truth: TruthState,
    truth_rng: SimRng,
    filters: Vec<ParticleFilter>,
    step: usize,
    contact: bool,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64) -> Result<Demo, JsError> {
        let sim = simulation()?;
        let mut truth_rng = stream(seed, 0);
        let truth = sim.initial_truth(&mut truth_rng);
        let filters = KINDS
            .iter()
            .enumerate()
            .map(|(i, &kind)| {
                let filter_seed = stream(seed, i as u64 + 1).random::<u64>();
                ParticleFilter::new(kind, sim.models(), truth.encoder.clone(), &sim.scenario.unobserved, filter_seed)
            })
            .collect();
        Ok(Demo { sim, truth, truth_rng, filters, step: 0, contact: false })
    }

    /// Number of scripted steps.
    pub fn steps(&self) -> usize {
        self.sim.scenario.script.len()
    }

    /// Steps taken so far.
    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Advance truth and every filter by one scripted command. Returns false
    /// once the script is exhausted.
    pub fn advance(&mut self) -> bool {
        let Some(u) = self.sim.scenario.script.commands().get(self.step) else {
            return false;
        };
        self.truth = self.sim.step_truth(&self.truth, u, &mut self.truth_rng);
        let z = self.sim.observe(&self.truth);
        self.contact = !z.contact.is_clear();
        for f in &mut self.filters {
            f.step(u, &z);
        }
        self.step += 1;
        true
    }

    /// Whether the tip sensor reported contact on the last step.
    pub fn in_contact(&self) -> bool {
        self.contact
    }

    /// True joint angles.
    pub fn truth(&self) -> Vec<f64> {
        self.truth.q_true.iter().copied().collect()
    }

    /// Encoder reading.
    pub fn encoder(&self) -> Vec<f64> {
        self.truth.encoder.iter().copied().collect()
    }

    /// Particles of filter `index` as `[q1, q2, weight]` triples.
    pub fn particles(&self, index: usize) -> Vec<f64> {
        let Some(f) = self.filters.get(index) else {
            return Vec::new();
        };
        let set = f.particles();
        set.configurations(f.encoder()).iter().zip(set.particles()).flat_map(|(q, p)| [q[0], q[1], p.weight]).collect()
    }

    /// Current W-RMSE of every filter, in display order.
    pub fn wrmse(&self) -> Vec<f64> {
        self.filters.iter().map(|f| f.w_rmse(&self.truth.q_true)).collect()
    }
}

/// The z = 0 slice of the scenario's distance field, row-major with `x`
/// varying fastest, preceded by `[nx, ny, min_x, min_y, max_x, max_y]`.
#[wasm_bindgen]
pub fn sdf_slice() -> Result<Vec<f64>, JsError> {
    let sim = simulation()?;
    let sdf = &sim.world.sdf;
    let rows = sdf.slice(2, 0).ok_or_else(|| JsError::new("empty grid"))?;
    let (lo, hi) = (sdf.bounds().min, sdf.bounds().max);
    let mut out = vec![rows.first().map_or(0, Vec::len) as f64, rows.len() as f64, lo.x, lo.y, hi.x, hi.y];
    out.extend(rows.into_iter().flatten());
    Ok(out)
}

/// `n` uniform-projection samples of the tip-contact manifold as `[q1, q2]`
/// pairs. Failed projections are dropped, so fewer pairs may come back.
#[wasm_bindgen]
pub fn manifold_samples(n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let sim = simulation()?;
    let c = ContactVector::from_active(sim.world.n_sensors(), &[0]);
    let batch = sample_uniform_projection(&sim.world, &c, n, &sim.scenario.projection, &mut seeded(seed));
    Ok(batch.configs.iter().flat_map(|q| [q[0], q[1]]).collect())
}
