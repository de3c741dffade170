//! Scenario files: TOML documents describing the robot, sensors,
//! environment, command script and every estimator parameter.
//!
//! Parsing happens in two stages. Serde reads the document into loosely
//! typed `Raw*` structs, then [`Scenario::from_toml_str`] checks every
//! invariant and reports each violation with its field path.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DVector, Vector3};
use serde::Deserialize;
use thiserror::Error;

use super::script::{ActionScript, ScriptError};
use crate::filter::{Bandwidth, KdeSettings, ObservationNoise, ResamplePolicy, TransitionNoise, UnobservedPrior};
use crate::kinematics::{ChainModel, Configuration, Dim, Joint, SensorSpec};
use crate::manifold::ProjectionSettings;
use crate::sdf::{Primitive, WorkspaceBounds};

/// One violated invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error("{path}: {source}")]
    Script { path: PathBuf, source: ScriptError },
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub chain: ChainModel,
    pub sensors: Vec<SensorSpec>,
    pub bodies: Vec<SensorSpec>,
    pub environment: Vec<Primitive>,
    pub bounds: WorkspaceBounds,
    pub resolution: f64,
    pub script: ActionScript,
    /// True configuration at time zero.
    pub start: Configuration,
    pub transition: TransitionNoise,
    pub observation: ObservationNoise,
    pub unobserved: UnobservedPrior,
    pub particles: usize,
    pub projection: ProjectionSettings,
    pub kde: KdeSettings,
    pub resample: ResamplePolicy,
    pub inactive_factor: bool,
    /// A sensor reads contact when its sphere distance is at most this (m).
    pub contact_threshold: f64,
    /// Raw bytes the scenario was built from (document, then script), for
    /// hashing into run manifests.
    pub source: Vec<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    dimension: u8,
    dt: f64,
    #[serde(default = "default_particles")]
    particles: usize,
    start: Vec<f64>,
    script: Option<String>,
    commands: Option<Vec<Vec<f64>>>,
    contact_threshold: Option<f64>,
    chain: RawChain,
    #[serde(default)]
    sensors: Vec<RawSphere>,
    #[serde(default)]
    bodies: Vec<RawSphere>,
    environment: RawEnvironment,
    noise: RawNoise,
    #[serde(default)]
    projection: RawProjection,
    #[serde(default)]
    kde: RawKde,
    #[serde(default)]
    filter: RawFilter,
}

fn default_particles() -> usize {
    250
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    base: Option<Vec<f64>>,
    tool: Option<Vec<f64>>,
    joints: Vec<RawJoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    axis: Option<Vec<f64>>,
    offset: Vec<f64>,
    limits: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSphere {
    link: usize,
    offset: Vec<f64>,
    #[serde(default)]
    radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    min: Vec<f64>,
    max: Vec<f64>,
    resolution: f64,
    #[serde(default)]
    primitives: Vec<RawPrimitive>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawPrimitive {
    Sphere { center: Vec<f64>, radius: f64 },
    Box { center: Vec<f64>, half_extents: Vec<f64> },
    Point { center: Vec<f64> },
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Bitmap { origin: Vec<f64>, resolution: f64, rows: Vec<String> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarOrVector {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    r_a: f64,
    offset_variance: ScalarOrVector,
    sigma_c: Option<f64>,
    #[serde(default)]
    unobserved: Vec<usize>,
    #[serde(default = "default_unobserved_radius")]
    unobserved_radius: f64,
}

fn default_unobserved_radius() -> f64 {
    1.0
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawProjection {
    learning_rate: Option<f64>,
    max_iterations: Option<usize>,
    manifold_tolerance: Option<f64>,
    step_tolerance: Option<f64>,
    max_retries: Option<usize>,
    backtracking_factor: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawBandwidth {
    Rule(String),
    Fixed(Vec<f64>),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawKde {
    bandwidth: Option<RawBandwidth>,
    floor: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    resample: Option<String>,
    inactive_factor: Option<bool>,
}

/// Collects violations while converting raw values.
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { field: field.into(), message: message.into() });
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.fail(field, format!("must be positive, got {v}"));
        }
    }

    fn nonnegative(&mut self, field: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.fail(field, format!("must be nonnegative, got {v}"));
        }
    }

    /// Workspace point of the scenario's arity; z = 0 for planar input.
    fn point(&mut self, field: &str, v: &[f64], dim: Dim) -> Vector3<f64> {
        if v.len() != dim.arity() {
            self.fail(field, format!("expected {} components, found {}", dim.arity(), v.len()));
            return Vector3::zeros();
        }
        if v.iter().any(|x| !x.is_finite()) {
            self.fail(field, "components must be finite");
        }
        let mut p = Vector3::zeros();
        for (i, x) in v.iter().enumerate() {
            p[i] = *x;
        }
        p
    }
}

impl Scenario {
    /// Load a scenario file. A relative `script` path is resolved against the
    /// scenario file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, path, |script| {
            let script_path = dir.join(script);
            std::fs::read_to_string(&script_path)
                .map(|t| (script_path.clone(), t))
                .map_err(|source| ScenarioError::Io { path: script_path, source })
        })
    }

    /// Parse a scenario document whose commands are inline (or whose script
    /// path is never read).
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        Self::parse(text, Path::new("<inline>"), |script| {
            Err(ScenarioError::Invalid(vec![Violation {
                field: "script".into(),
                message: format!("cannot read script {script:?} from an inline scenario"),
            }]))
        })
    }

    /// Parse a scenario document together with the contents of the script it
    /// names, for callers without a file system.
    pub fn from_toml_and_script(text: &str, script: &str) -> Result<Self, ScenarioError> {
        Self::parse(text, Path::new("<inline>"), |name| Ok((PathBuf::from(name), script.to_string())))
    }

    fn parse(
        text: &str,
        path: &Path,
        read_script: impl FnOnce(&str) -> Result<(PathBuf, String), ScenarioError>,
    ) -> Result<Self, ScenarioError> {
        let raw: RawScenario =
            toml::from_str(text).map_err(|e| ScenarioError::Parse { path: path.into(), message: e.to_string() })?;
        let mut source = text.as_bytes().to_vec();
        let mut ck = Checker { violations: Vec::new() };

        let dim = match Dim::from_arity(raw.dimension as usize) {
            Some(d) => d,
            None => {
                ck.fail("dimension", format!("must be 2 or 3, got {}", raw.dimension));
                return Err(ScenarioError::Invalid(ck.violations));
            }
        };
        ck.positive("dt", raw.dt);
        if raw.particles == 0 {
            ck.fail("particles", "must be at least 1");
        }

        // chain
        let n = raw.chain.joints.len();
        if n == 0 {
            ck.fail("chain.joints", "chain needs at least one joint");
        }
        let base = raw.chain.base.as_deref().map_or(Vector3::zeros(), |b| ck.point("chain.base", b, dim));
        let tool = raw.chain.tool.as_deref().map_or(Vector3::zeros(), |t| ck.point("chain.tool", t, dim));
        let mut joints = Vec::with_capacity(n);
        for (j, rj) in raw.chain.joints.iter().enumerate() {
            let field = format!("chain.joints[{j}]");
            let axis = match (&rj.axis, dim) {
                (None, _) => Vector3::z(),
                (Some(a), _) if a.len() == 3 => Vector3::new(a[0], a[1], a[2]),
                (Some(a), _) => {
                    ck.fail(format!("{field}.axis"), format!("expected 3 components, found {}", a.len()));
                    Vector3::z()
                }
            };
            if (axis.norm() - 1.0).abs() > 1e-9 {
                ck.fail(format!("{field}.axis"), "must be unit length");
            }
            if dim == Dim::Two && (axis.x != 0.0 || axis.y != 0.0) {
                ck.fail(format!("{field}.axis"), "planar chains rotate about z only");
            }
            let offset = ck.point(&format!("{field}.offset"), &rj.offset, dim);
            let [lo, hi] = rj.limits;
            if !(lo <= hi) {
                ck.fail(format!("{field}.limits"), format!("lower limit {lo} exceeds upper limit {hi}"));
            }
            joints.push(Joint::revolute(if axis.norm() > 0.0 { axis } else { Vector3::z() }, offset, (lo, hi)));
        }

        let spheres = |list: &[RawSphere], what: &str, ck: &mut Checker| -> Vec<SensorSpec> {
            list.iter()
                .enumerate()
                .map(|(i, s)| {
                    let field = format!("{what}[{i}]");
                    if s.link >= n {
                        ck.fail(format!("{field}.link"), format!("link {} out of range for {n} joints", s.link));
                    }
                    ck.nonnegative(&format!("{field}.radius"), s.radius);
                    SensorSpec::new(s.link, ck.point(&format!("{field}.offset"), &s.offset, dim), s.radius)
                })
                .collect()
        };
        let sensors = spheres(&raw.sensors, "sensors", &mut ck);
        let bodies = spheres(&raw.bodies, "bodies", &mut ck);
        if sensors.is_empty() {
            ck.fail("sensors", "at least one contact sensor is required");
        }

        // environment
        let env = &raw.environment;
        ck.positive("environment.resolution", env.resolution);
        let min = ck.point("environment.min", &env.min, dim);
        let max = ck.point("environment.max", &env.max, dim);
        for axis in 0..dim.arity() {
            if !(min[axis] < max[axis]) {
                ck.fail("environment", format!("min must be below max along axis {axis}"));
            }
        }
        let bounds = WorkspaceBounds { min, max, dim };
        let environment: Vec<Primitive> = env
            .primitives
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let field = format!("environment.primitives[{i}]");
                let prim = match p {
                    RawPrimitive::Sphere { center, radius } => {
                        Primitive::sphere(ck.point(&format!("{field}.center"), center, dim), *radius)
                    }
                    RawPrimitive::Box { center, half_extents } => Primitive::cuboid(
                        ck.point(&format!("{field}.center"), center, dim),
                        ck.point(&format!("{field}.half_extents"), half_extents, dim),
                    ),
                    RawPrimitive::Point { center } => {
                        Primitive::point(ck.point(&format!("{field}.center"), center, dim))
                    }
                    RawPrimitive::HalfSpace { normal, offset } => {
                        Primitive::half_space(ck.point(&format!("{field}.normal"), normal, dim), *offset)
                    }
                    RawPrimitive::Bitmap { origin, resolution, rows } => {
                        if dim != Dim::Two {
                            ck.fail(field.as_str(), "bitmaps are planar only");
                        }
                        Primitive::bitmap_from_text(
                            rows,
                            ck.point(&format!("{field}.origin"), origin, dim),
                            *resolution,
                        )
                    }
                };
                if let Err(message) = prim.check() {
                    ck.fail(field, message);
                }
                prim
            })
            .collect();

        // start
        if raw.start.len() != n {
            ck.fail("start", format!("expected {n} joint angles, found {}", raw.start.len()));
        }
        let start = DVector::from_vec(raw.start.clone());

        // noise
        ck.nonnegative("noise.r_a", raw.noise.r_a);
        let variance = match &raw.noise.offset_variance {
            ScalarOrVector::Scalar(v) => DVector::from_element(n, *v),
            ScalarOrVector::Vector(v) => {
                if v.len() != n {
                    ck.fail("noise.offset_variance", format!("expected {n} entries, found {}", v.len()));
                }
                DVector::from_vec(v.clone())
            }
        };
        if variance.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            ck.fail("noise.offset_variance", "diagonal entries must be positive");
        }
        let sigma_c = raw.noise.sigma_c.unwrap_or(env.resolution);
        ck.positive("noise.sigma_c", sigma_c);
        let mut observed = vec![true; n];
        for &j in &raw.noise.unobserved {
            if j >= n {
                ck.fail("noise.unobserved", format!("joint {j} out of range"));
            } else {
                observed[j] = false;
            }
        }
        ck.nonnegative("noise.unobserved_radius", raw.noise.unobserved_radius);

        // projection
        let mut projection = ProjectionSettings::for_resolution(env.resolution.max(0.0));
        let rp = &raw.projection;
        if let Some(v) = rp.learning_rate {
            projection.learning_rate = v;
        }
        if let Some(v) = rp.max_iterations {
            projection.max_iterations = v;
        }
        if let Some(v) = rp.manifold_tolerance {
            projection.manifold_tolerance = v;
        }
        if let Some(v) = rp.step_tolerance {
            projection.step_tolerance = v;
        }
        if let Some(v) = rp.max_retries {
            projection.max_retries = v;
        }
        if let Some(v) = rp.backtracking_factor {
            projection.backtracking_factor = v;
        }
        if let Err(message) = projection.check() {
            ck.fail("projection", message);
        }

        // kde
        let mut kde = KdeSettings::default();
        if let Some(f) = raw.kde.floor {
            ck.positive("kde.floor", f);
            kde.floor = f;
        }
        match &raw.kde.bandwidth {
            None => {}
            Some(RawBandwidth::Rule(r)) if r == "silverman" => {}
            Some(RawBandwidth::Rule(r)) => {
                ck.fail("kde.bandwidth", format!("unknown rule {r:?} (expected \"silverman\")"))
            }
            Some(RawBandwidth::Fixed(h)) => {
                if h.len() != n {
                    ck.fail("kde.bandwidth", format!("expected {n} entries, found {}", h.len()));
                }
                if h.iter().any(|v| !(*v > 0.0)) {
                    ck.fail("kde.bandwidth", "bandwidths must be positive");
                }
                kde.bandwidth = Bandwidth::Fixed(DVector::from_vec(h.clone()));
            }
        }

        let resample = match raw.filter.resample.as_deref() {
            None | Some("ess") => ResamplePolicy::EffectiveSampleSize,
            Some("always") => ResamplePolicy::Always,
            Some(other) => {
                ck.fail("filter.resample", format!("unknown policy {other:?} (expected \"ess\" or \"always\")"));
                ResamplePolicy::EffectiveSampleSize
            }
        };

        let contact_threshold = raw.contact_threshold.unwrap_or(0.5 * env.resolution);
        ck.nonnegative("contact_threshold", contact_threshold);

        if !ck.violations.is_empty() {
            return Err(ScenarioError::Invalid(ck.violations));
        }

        let chain = ChainModel::new(dim, base, joints, tool)
            .map_err(|e| ScenarioError::Invalid(vec![Violation { field: "chain".into(), message: e.to_string() }]))?;

        let script = match (&raw.script, &raw.commands) {
            (Some(_), Some(_)) => {
                return Err(ScenarioError::Invalid(vec![Violation {
                    field: "script".into(),
                    message: "give either `script` or `commands`, not both".into(),
                }]))
            }
            (None, None) => {
                return Err(ScenarioError::Invalid(vec![Violation {
                    field: "script".into(),
                    message: "a command script is required".into(),
                }]))
            }
            (None, Some(cmds)) => {
                if let Some((i, c)) = cmds.iter().enumerate().find(|(_, c)| c.len() != n) {
                    return Err(ScenarioError::Invalid(vec![Violation {
                        field: format!("commands[{i}]"),
                        message: format!("expected {n} velocities, found {}", c.len()),
                    }]));
                }
                ActionScript::new(cmds.iter().map(|c| DVector::from_vec(c.clone())).collect())
            }
            (Some(file), None) => {
                let (script_path, script_text) = read_script(file)?;
                source.extend_from_slice(script_text.as_bytes());
                ActionScript::parse(&script_text, n)
                    .map_err(|source| ScenarioError::Script { path: script_path, source })?
            }
        };
        if script.is_empty() {
            return Err(ScenarioError::Invalid(vec![Violation {
                field: "script".into(),
                message: "script has no commands".into(),
            }]));
        }

        Ok(Scenario {
            name: raw.name,
            chain,
            sensors,
            bodies,
            environment,
            bounds,
            resolution: env.resolution,
            script,
            start,
            transition: TransitionNoise { r_a: raw.noise.r_a, dt: raw.dt },
            observation: ObservationNoise { offset_variance: variance, sigma_c },
            unobserved: UnobservedPrior { observed, radius: raw.noise.unobserved_radius },
            particles: raw.particles,
            projection,
            kde,
            resample,
            inactive_factor: raw.filter.inactive_factor.unwrap_or(true),
            contact_threshold,
            source,
        })
    }
}
