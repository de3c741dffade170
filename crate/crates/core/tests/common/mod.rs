//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use mpf::kinematics::{sensor_centers, ChainModel, Dim, Joint, SensorSpec};
use mpf::manifold::{loss, ContactVector};
use mpf::sdf::{GridGeometry, OccupancyGrid, Primitive, SdfGrid, WorkspaceBounds};
use mpf::world::World;
use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

/// Random occupancy grid with the given shape (`shape[2] == 1` for planar)
/// and occupied fraction.
pub fn random_occupancy<R: Rng>(shape: [usize; 3], density: f64, rng: &mut R) -> OccupancyGrid {
    let resolution = rng.random_range(0.01..0.2);
    let max = shape.map(|n| n as f64 * resolution);
    let bounds = if shape[2] == 1 {
        WorkspaceBounds::planar([0.0, 0.0], [max[0], max[1]]).unwrap()
    } else {
        WorkspaceBounds::spatial([0.0, 0.0, 0.0], max).unwrap()
    };
    let geometry = GridGeometry { bounds, resolution, shape };
    let cells = (0..geometry.len()).map(|_| rng.random::<f64>() < density).collect();
    OccupancyGrid { geometry, cells, rejected: Vec::new() }
}

/// Signed distance by scanning every voxel: free voxels take the distance
/// to the nearest occupied center, occupied voxels minus the distance to
/// the nearest free one, both clamped to the bounds diagonal.
pub fn brute_force_sdf(occ: &OccupancyGrid) -> Vec<f64> {
    let g = &occ.geometry;
    let coords: Vec<[f64; 3]> = (0..g.len()).map(|i| g.coords(i).map(|c| c as f64)).collect();
    let occupied: Vec<usize> = (0..g.len()).filter(|&i| occ.cells[i]).collect();
    let free: Vec<usize> = (0..g.len()).filter(|&i| !occ.cells[i]).collect();
    let diagonal = g.bounds.diagonal();
    (0..g.len())
        .map(|a| {
            let targets = if occ.cells[a] { &free } else { &occupied };
            let best = targets
                .iter()
                .map(|&b| (0..3).map(|k| (coords[a][k] - coords[b][k]).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let d = (best.sqrt() * g.resolution).min(diagonal);
            if occ.cells[a] {
                -d
            } else {
                d
            }
        })
        .collect()
}

/// Random serial chain: planar with z axes, or spatial with random unit
/// axes and offsets.
pub fn random_chain<R: Rng>(rng: &mut R, dim: Dim, n: usize) -> ChainModel {
    let joints = (0..n)
        .map(|j| {
            let offset = if j == 0 {
                Vector3::zeros()
            } else {
                match dim {
                    Dim::Two => Vector3::new(rng.random_range(0.1..1.0), rng.random_range(-0.3..0.3), 0.0),
                    Dim::Three => Vector3::from_fn(|_, _| rng.random_range(-0.6..0.6)),
                }
            };
            let axis = match dim {
                Dim::Two => Vector3::z(),
                Dim::Three => loop {
                    let a = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
                    if a.norm() > 0.2 {
                        break a.normalize();
                    }
                },
            };
            Joint::revolute(axis, offset, (-3.2, 3.2))
        })
        .collect();
    let tool = match dim {
        Dim::Two => Vector3::new(rng.random_range(0.1..1.0), 0.0, 0.0),
        Dim::Three => Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5)),
    };
    let base = match dim {
        Dim::Two => Vector3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), 0.0),
        Dim::Three => Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5)),
    };
    ChainModel::new(dim, base, joints, tool).unwrap()
}

pub fn random_sensor<R: Rng>(rng: &mut R, chain: &ChainModel) -> SensorSpec {
    let link = rng.random_range(0..chain.n_joints());
    let offset = match chain.dim() {
        Dim::Two => Vector3::new(rng.random_range(0.0..0.8), rng.random_range(-0.2..0.2), 0.0),
        Dim::Three => Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5)),
    };
    SensorSpec::new(link, offset, rng.random_range(0.0..0.05))
}

pub fn random_configuration<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0))
}

/// Central finite-difference Jacobian of a sensor center.
pub fn fd_jacobian(chain: &ChainModel, q: &DVector<f64>, sensor: &SensorSpec, h: f64) -> DMatrix<f64> {
    let rows = chain.dim().arity();
    let at = |q: &DVector<f64>| sensor_centers(chain, q, std::slice::from_ref(sensor))[0].coords;
    let mut jac = DMatrix::zeros(rows, q.len());
    for j in 0..q.len() {
        let mut fwd = q.clone();
        let mut back = q.clone();
        fwd[j] += h;
        back[j] -= h;
        let col = (at(&fwd) - at(&back)) / (2.0 * h);
        for r in 0..rows {
            jac[(r, j)] = col[r];
        }
    }
    jac
}

/// Central finite-difference gradient of the contact loss.
pub fn fd_loss_gradient(world: &World, q: &DVector<f64>, c: &ContactVector, h: f64) -> DVector<f64> {
    DVector::from_fn(q.len(), |j, _| {
        let mut fwd = q.clone();
        let mut back = q.clone();
        fwd[j] += h;
        back[j] -= h;
        (loss(world, &fwd, c).value - loss(world, &back, c).value) / (2.0 * h)
    })
}

/// Relative error with an absolute floor for near-zero references.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(1e-8)
}

/// Two-link planar arm with unit links and a tip point sensor, plus a point
/// obstacle at `target` on a voxel center. Resolution 0.02, bounds ±2.2.
pub fn two_link_point_world(target: Vector3<f64>) -> World {
    let bounds = WorkspaceBounds::planar([-2.2, -2.2], [2.2, 2.2]).unwrap();
    let sdf = SdfGrid::from_primitives(&[Primitive::point(target)], bounds, 0.02).unwrap();
    let chain = ChainModel::planar(&[1.0, 1.0], (-std::f64::consts::PI, std::f64::consts::PI)).unwrap();
    World::new(chain, vec![SensorSpec::point(1, Vector3::new(1.0, 0.0, 0.0))], vec![], sdf).unwrap()
}

/// Both inverse-kinematics solutions of a unit two-link arm reaching `p`.
pub fn two_link_ik(p: &Vector3<f64>) -> [DVector<f64>; 2] {
    let r2 = p.x * p.x + p.y * p.y;
    let c2 = (r2 - 2.0) / 2.0;
    let elbow = c2.clamp(-1.0, 1.0).acos();
    let solve = |q2: f64| {
        let q1 = p.y.atan2(p.x) - q2.sin().atan2(1.0 + q2.cos());
        DVector::from_vec(vec![wrap(q1), q2])
    };
    [solve(elbow), solve(-elbow)]
}

pub fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    a - t * ((a + std::f64::consts::PI) / t).floor()
}

/// Angular distance between configurations, wrapping each joint.
pub fn wrapped_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| wrap(x - y).powi(2)).sum::<f64>().sqrt()
}

/// One-sided paired t-test of `mean(a - b) < 0`. Returns the t statistic and
/// the p-value.
pub fn paired_one_sided(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return (if m < 0.0 { f64::NEG_INFINITY } else { f64::INFINITY }, if m < 0.0 { 0.0 } else { 1.0 });
    }
    let t = m / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    (t, dist.cdf(t))
}

/// A chain inside a grid whose field is exactly affine away from the
/// surface: an axis-aligned half-space. Central differences of the
/// interpolated field are then exact, so any mismatch is a chain-rule error.
pub fn affine_world<R: Rng>(rng: &mut R, dim: Dim) -> World {
    let n = rng.random_range(2..6);
    let chain = random_chain(rng, dim, n);
    let axis = rng.random_range(0..dim.arity());
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut normal = Vector3::zeros();
    normal[axis] = sign;
    // the boundary sits on a voxel face beyond the chain's reach (< 6)
    let res = 0.25;
    let offset = -7.0;
    let bounds = match dim {
        Dim::Two => WorkspaceBounds::planar([-8.0, -8.0], [8.0, 8.0]).unwrap(),
        Dim::Three => WorkspaceBounds::spatial([-8.0, -8.0, -8.0], [8.0, 8.0, 8.0]).unwrap(),
    };
    let sdf = SdfGrid::from_primitives(&[Primitive::half_space(normal, offset)], bounds, res).unwrap();
    let sensors = (0..rng.random_range(1..5)).map(|_| random_sensor(rng, &chain)).collect();
    World::new(chain, sensors, vec![], sdf).unwrap()
}
