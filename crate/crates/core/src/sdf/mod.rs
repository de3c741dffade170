//! Voxelized environments and their signed distance fields.
//!
//! The environment is rasterized into an [`OccupancyGrid`] from a list of
//! [`Primitive`]s. [`distance_transform`] turns that into an [`SdfGrid`] by
//! running the exact separable squared-distance transform twice, once towards
//! the occupied voxels and once towards the free ones, and combining the two
//! with a sign flip. Queries interpolate multilinearly between voxel centers.
//!
//! Planar grids are stored as `nx x ny x 1`.

mod primitive;
mod transform;

pub use primitive::Primitive;

use nalgebra::Vector3;
use thiserror::Error;

use crate::kinematics::Dim;

#[derive(Debug, Error, PartialEq)]
pub enum SdfError {
    #[error("resolution must be positive and finite, got {0}")]
    Resolution(f64),
    #[error("workspace bounds are empty along axis {axis}")]
    EmptyBounds { axis: usize },
    #[error("primitive {index}: {message}")]
    Primitive { index: usize, message: String },
}

/// Axis-aligned workspace box. For planar workspaces the z range is unused.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorkspaceBounds {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
    pub dim: Dim,
}

impl WorkspaceBounds {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>, dim: Dim) -> Result<Self, SdfError> {
        for axis in 0..dim.arity() {
            if !(min[axis] < max[axis]) {
                return Err(SdfError::EmptyBounds { axis });
            }
        }
        Ok(WorkspaceBounds { min, max, dim })
    }

    pub fn planar(min: [f64; 2], max: [f64; 2]) -> Result<Self, SdfError> {
        Self::new(Vector3::new(min[0], min[1], 0.0), Vector3::new(max[0], max[1], 0.0), Dim::Two)
    }

    pub fn spatial(min: [f64; 3], max: [f64; 3]) -> Result<Self, SdfError> {
        Self::new(Vector3::from(min), Vector3::from(max), Dim::Three)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..self.dim.arity()).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn diagonal(&self) -> f64 {
        let d = self.max - self.min;
        (0..self.dim.arity()).map(|i| d[i] * d[i]).sum::<f64>().sqrt()
    }

    pub(crate) fn corners(&self) -> Vec<Vector3<f64>> {
        let zs: &[f64] = match self.dim {
            Dim::Two => &[0.0],
            Dim::Three => &[self.min.z, self.max.z],
        };
        let mut out = Vec::new();
        for &x in &[self.min.x, self.max.x] {
            for &y in &[self.min.y, self.max.y] {
                for &z in zs {
                    out.push(Vector3::new(x, y, z));
                }
            }
        }
        out
    }
}

/// Voxel layout shared by occupancy and distance grids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridGeometry {
    pub bounds: WorkspaceBounds,
    pub resolution: f64,
    pub shape: [usize; 3],
}

impl GridGeometry {
    pub fn new(bounds: WorkspaceBounds, resolution: f64) -> Result<Self, SdfError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(SdfError::Resolution(resolution));
        }
        let mut shape = [1usize; 3];
        for (axis, n) in shape.iter_mut().enumerate().take(bounds.dim.arity()) {
            let extent = bounds.max[axis] - bounds.min[axis];
            *n = ((extent / resolution) - 1e-9).ceil().max(1.0) as usize;
        }
        Ok(GridGeometry { bounds, resolution, shape })
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.shape[0] * (j + self.shape[1] * k)
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let i = index % self.shape[0];
        let j = (index / self.shape[0]) % self.shape[1];
        let k = index / (self.shape[0] * self.shape[1]);
        [i, j, k]
    }

    /// Workspace position of a voxel center.
    pub fn center(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let r = self.resolution;
        let mut c = self.bounds.min + Vector3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * r;
        if self.bounds.dim == Dim::Two {
            c.z = 0.0;
        }
        c
    }

    /// Voxel containing `p`, if `p` lies inside the grid.
    pub fn voxel_of(&self, p: &Vector3<f64>) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for axis in 0..self.bounds.dim.arity() {
            let u = ((p[axis] - self.bounds.min[axis]) / self.resolution).floor();
            if u < 0.0 || u >= self.shape[axis] as f64 {
                return None;
            }
            out[axis] = u as usize;
        }
        Some(out)
    }
}

/// Dense boolean voxel grid; `true` marks an obstacle voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    pub geometry: GridGeometry,
    pub cells: Vec<bool>,
    /// Indices of input primitives that did not reach into the bounds.
    pub rejected: Vec<usize>,
}

impl OccupancyGrid {
    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }
}

/// Rasterize primitives: a voxel is occupied iff its center lies inside any
/// primitive. Point primitives occupy the voxel that contains them.
/// Primitives entirely outside the bounds are skipped and listed in
/// [`OccupancyGrid::rejected`].
pub fn build_occupancy(
    primitives: &[Primitive],
    bounds: WorkspaceBounds,
    resolution: f64,
) -> Result<OccupancyGrid, SdfError> {
    let geometry = GridGeometry::new(bounds, resolution)?;
    let mut cells = vec![false; geometry.len()];
    let mut rejected = Vec::new();
    for (index, prim) in primitives.iter().enumerate() {
        prim.check().map_err(|message| SdfError::Primitive { index, message })?;
        if !prim.touches(&bounds) {
            rejected.push(index);
            continue;
        }
        if let Primitive::Point { center } = prim {
            if let Some([i, j, k]) = geometry.voxel_of(center) {
                cells[geometry.index(i, j, k)] = true;
            }
            continue;
        }
        for (idx, cell) in cells.iter_mut().enumerate() {
            if !*cell {
                let [i, j, k] = geometry.coords(idx);
                *cell = prim.contains(&geometry.center(i, j, k));
            }
        }
    }
    Ok(OccupancyGrid { geometry, cells, rejected })
}

/// A scalar sampled from the field together with whether the query point
/// had to be clamped into the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T> {
    pub value: T,
    pub out_of_bounds: bool,
}

/// Signed distances (meters) at voxel centers: positive in free space,
/// negative inside obstacles.
#[derive(Clone, Debug, PartialEq)]
pub struct SdfGrid {
    pub geometry: GridGeometry,
    pub values: Vec<f64>,
}

/// Exact signed Euclidean distance transform of an occupancy grid.
///
/// Free voxels get the distance to the nearest occupied voxel center,
/// occupied voxels the negated distance to the nearest free voxel center.
/// Missing targets (all-free or all-occupied grids) are clamped to the
/// bounds diagonal.
pub fn distance_transform(occ: &OccupancyGrid) -> SdfGrid {
    let geometry = occ.geometry;
    let shape = geometry.shape;
    let outside = transform::squared_edt(&occ.cells, shape);
    let free: Vec<bool> = occ.cells.iter().map(|c| !c).collect();
    let inside = transform::squared_edt(&free, shape);
    let sentinel = geometry.bounds.diagonal();
    let r = geometry.resolution;
    let values = occ
        .cells
        .iter()
        .zip(outside.iter().zip(&inside))
        .map(
            |(&occupied, (&o, &i))| {
                if occupied {
                    -(i.sqrt() * r).min(sentinel)
                } else {
                    (o.sqrt() * r).min(sentinel)
                }
            },
        )
        .collect();
    SdfGrid { geometry, values }
}

impl SdfGrid {
    /// Convenience: rasterize and transform in one go.
    pub fn from_primitives(
        primitives: &[Primitive],
        bounds: WorkspaceBounds,
        resolution: f64,
    ) -> Result<Self, SdfError> {
        Ok(distance_transform(&build_occupancy(primitives, bounds, resolution)?))
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution
    }

    pub fn bounds(&self) -> &WorkspaceBounds {
        &self.geometry.bounds
    }

    pub fn dim(&self) -> Dim {
        self.geometry.bounds.dim
    }

    pub fn shape(&self) -> [usize; 3] {
        self.geometry.shape
    }

    pub fn value_at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.geometry.index(i, j, k)]
    }

    /// Multilinear interpolation of the voxel values at `p`. Points outside
    /// the bounds are clamped onto the boundary voxel layer and flagged.
    pub fn sample_distance(&self, p: &Vector3<f64>) -> FieldSample<f64> {
        FieldSample { value: self.interpolate(p), out_of_bounds: !self.geometry.bounds.contains(p) }
    }

    /// Central finite-difference gradient of the interpolated field with a
    /// step of one voxel.
    pub fn sample_gradient(&self, p: &Vector3<f64>) -> FieldSample<Vector3<f64>> {
        let h = self.geometry.resolution;
        let mut g = Vector3::zeros();
        for axis in 0..self.dim().arity() {
            let mut fwd = *p;
            let mut back = *p;
            fwd[axis] += h;
            back[axis] -= h;
            g[axis] = (self.interpolate(&fwd) - self.interpolate(&back)) / (2.0 * h);
        }
        FieldSample { value: g, out_of_bounds: !self.geometry.bounds.contains(p) }
    }

    fn interpolate(&self, p: &Vector3<f64>) -> f64 {
        let geo = &self.geometry;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for axis in 0..geo.bounds.dim.arity() {
            let n = geo.shape[axis];
            let u = ((p[axis] - geo.bounds.min[axis]) / geo.resolution - 0.5).clamp(0.0, (n - 1) as f64);
            let i0 = (u.floor() as usize).min(n.saturating_sub(2));
            base[axis] = i0;
            frac[axis] = u - i0 as f64;
        }
        let step = |axis: usize| usize::from(geo.shape[axis] > 1);
        let (sx, sy) = (step(0), step(1));
        let corner =
            |dx: usize, dy: usize, dz: usize| self.value_at(base[0] + dx * sx, base[1] + dy * sy, base[2] + dz);
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let plane = |dz: usize| {
            let y0 = lerp(corner(0, 0, dz), corner(1, 0, dz), frac[0]);
            let y1 = lerp(corner(0, 1, dz), corner(1, 1, dz), frac[0]);
            lerp(y0, y1, frac[1])
        };
        if geo.shape[2] > 1 {
            lerp(plane(0), plane(1), frac[2])
        } else {
            plane(0)
        }
    }

    /// Row-major slice perpendicular to `axis` at voxel `index`. Rows run
    /// along the higher remaining axis, columns along the lower one.
    pub fn slice(&self, axis: usize, index: usize) -> Option<Vec<Vec<f64>>> {
        let shape = self.geometry.shape;
        if axis > 2 || index >= shape[axis] {
            return None;
        }
        let (col_axis, row_axis) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let rows = (0..shape[row_axis])
            .map(|r| {
                (0..shape[col_axis])
                    .map(|c| {
                        let mut ijk = [0usize; 3];
                        ijk[axis] = index;
                        ijk[row_axis] = r;
                        ijk[col_axis] = c;
                        self.value_at(ijk[0], ijk[1], ijk[2])
                    })
                    .collect()
            })
            .collect();
        Some(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_bounds_2d(n: f64) -> WorkspaceBounds {
        WorkspaceBounds::planar([0.0, 0.0], [n, n]).unwrap()
    }

    #[test]
    fn empty_environment_is_free() {
        let occ = build_occupancy(&[], unit_bounds_2d(4.0), 0.5).unwrap();
        assert_eq!(occ.cells.len(), 64);
        assert_eq!(occ.occupied_count(), 0);
    }

    #[test]
    fn small_sphere_occupies_one_voxel() {
        let geo = GridGeometry::new(unit_bounds_2d(4.0), 0.5).unwrap();
        let c = geo.center(3, 5, 0);
        let occ = build_occupancy(&[Primitive::sphere(c, 0.25)], unit_bounds_2d(4.0), 0.5).unwrap();
        assert_eq!(occ.occupied_count(), 1);
        assert!(occ.cells[geo.index(3, 5, 0)]);
    }

    #[test]
    fn half_box_fills_half() {
        let bounds = unit_bounds_2d(1.0);
        let res = 0.05;
        let prim = Primitive::cuboid(Vector3::new(0.25, 0.5, 0.0), Vector3::new(0.25, 0.6, 0.0));
        let occ = build_occupancy(&[prim], bounds, res).unwrap();
        let frac = occ.occupied_count() as f64 / occ.cells.len() as f64;
        // one voxel layer of a 20-wide grid is 5%
        assert!((frac - 0.5).abs() <= 0.05, "fraction {frac}");
    }

    #[test]
    fn cell_count_is_ceiling_of_extent() {
        let bounds = WorkspaceBounds::spatial([0.0, 0.0, 0.0], [1.0, 0.45, 0.3]).unwrap();
        let geo = GridGeometry::new(bounds, 0.1).unwrap();
        assert_eq!(geo.shape, [10, 5, 3]);
    }

    #[test]
    fn configuration_errors() {
        assert_eq!(GridGeometry::new(unit_bounds_2d(1.0), 0.0), Err(SdfError::Resolution(0.0)));
        assert!(matches!(WorkspaceBounds::planar([0.0, 1.0], [1.0, 1.0]), Err(SdfError::EmptyBounds { axis: 1 })));
    }

    #[test]
    fn out_of_bounds_primitive_is_rejected() {
        let far = Primitive::sphere(Vector3::new(10.0, 10.0, 0.0), 0.5);
        let occ = build_occupancy(&[far], unit_bounds_2d(1.0), 0.1).unwrap();
        assert_eq!(occ.rejected, vec![0]);
        assert_eq!(occ.occupied_count(), 0);
    }

    #[test]
    fn three_by_three_center_obstacle() {
        let bounds = unit_bounds_2d(3.0);
        let occ = build_occupancy(&[Primitive::point(Vector3::new(1.5, 1.5, 0.0))], bounds, 1.0).unwrap();
        let sdf = distance_transform(&occ);
        let s2 = 2f64.sqrt();
        assert!((sdf.value_at(0, 0, 0) - s2).abs() < 1e-12);
        assert!((sdf.value_at(2, 2, 0) - s2).abs() < 1e-12);
        assert!((sdf.value_at(1, 0, 0) - 1.0).abs() < 1e-12);
        assert!((sdf.value_at(0, 1, 0) - 1.0).abs() < 1e-12);
        assert!(sdf.value_at(1, 1, 0) <= 0.0);
    }

    #[test]
    fn all_occupied_is_nonpositive() {
        let bounds = unit_bounds_2d(1.0);
        let prim = Primitive::half_space(Vector3::x(), 5.0);
        let sdf = SdfGrid::from_primitives(&[prim], bounds, 0.1).unwrap();
        assert!(sdf.values.iter().all(|v| *v <= 0.0));
        assert!(sdf.values.iter().all(|v| (*v + bounds.diagonal()).abs() < 1e-12));
    }

    #[test]
    fn interpolation_identity_and_midpoint() {
        let bounds = unit_bounds_2d(2.0);
        let sdf = SdfGrid::from_primitives(&[Primitive::point(Vector3::new(0.3, 0.7, 0.0))], bounds, 0.2).unwrap();
        let geo = sdf.geometry;
        let a = geo.center(4, 6, 0);
        let b = geo.center(5, 6, 0);
        assert!((sdf.sample_distance(&a).value - sdf.value_at(4, 6, 0)).abs() < 1e-12);
        let mid = sdf.sample_distance(&((a + b) / 2.0)).value;
        assert!((mid - 0.5 * (sdf.value_at(4, 6, 0) + sdf.value_at(5, 6, 0))).abs() < 1e-12);
    }

    #[test]
    fn half_space_distance_and_gradient() {
        let bounds = WorkspaceBounds::planar([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let res = 0.02;
        let sdf = SdfGrid::from_primitives(&[Primitive::half_space(Vector3::x(), 0.0)], bounds, res).unwrap();
        for d in [0.1, 0.33, 0.6] {
            let p = Vector3::new(d, 0.05, 0.0);
            let s = sdf.sample_distance(&p);
            assert!(!s.out_of_bounds);
            assert!((s.value - d).abs() <= res, "d={d} got {}", s.value);
            let g = sdf.sample_gradient(&p).value;
            assert!((g.x - 1.0).abs() < 0.1 && g.y.abs() < 0.1, "{g:?}");
        }
    }

    #[test]
    fn deep_inside_gradient_vanishes() {
        let bounds = WorkspaceBounds::planar([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let sdf = SdfGrid::from_primitives(&[Primitive::half_space(Vector3::x(), 10.0)], bounds, 0.05).unwrap();
        let g = sdf.sample_gradient(&Vector3::new(0.1, 0.2, 0.0)).value;
        assert_eq!(g, Vector3::zeros());
    }

    #[test]
    fn sphere_gradient_points_outward() {
        let bounds = WorkspaceBounds::spatial([-1.0; 3], [1.0; 3]).unwrap();
        let center = Vector3::new(0.1, -0.05, 0.0);
        let sdf = SdfGrid::from_primitives(&[Primitive::sphere(center, 0.3)], bounds, 0.04).unwrap();
        for v in [Vector3::new(0.5, 0.1, 0.2), Vector3::new(-0.3, 0.4, -0.1), Vector3::new(0.0, 0.0, -0.6)] {
            let g = sdf.sample_gradient(&(center + v)).value;
            let cos = g.dot(&v) / (g.norm() * v.norm());
            assert!(cos > 10f64.to_radians().cos(), "angle too large: cos={cos}");
        }
    }

    #[test]
    fn out_of_bounds_query_is_clamped_and_flagged() {
        let bounds = unit_bounds_2d(1.0);
        let sdf = SdfGrid::from_primitives(&[Primitive::point(Vector3::new(0.5, 0.5, 0.0))], bounds, 0.1).unwrap();
        let inside = sdf.sample_distance(&Vector3::new(0.95, 0.55, 0.0));
        let outside = sdf.sample_distance(&Vector3::new(3.0, 0.55, 0.0));
        assert!(outside.out_of_bounds);
        assert!(!inside.out_of_bounds);
        assert!((inside.value - outside.value).abs() < 1e-12);
    }

    #[test]
    fn slice_shapes() {
        let bounds = WorkspaceBounds::spatial([0.0; 3], [0.4, 0.3, 0.2]).unwrap();
        let sdf = SdfGrid::from_primitives(&[], bounds, 0.1).unwrap();
        let z = sdf.slice(2, 1).unwrap();
        assert_eq!((z.len(), z[0].len()), (3, 4));
        let x = sdf.slice(0, 3).unwrap();
        assert_eq!((x.len(), x[0].len()), (2, 3));
        assert!(sdf.slice(2, 2).is_none());
    }

    #[test]
    fn bitmap_rows_read_top_down() {
        let prim = Primitive::bitmap_from_text(&["#.", ".."], Vector3::zeros(), 1.0);
        assert!(prim.contains(&Vector3::new(0.5, 1.5, 0.0)));
        assert!(!prim.contains(&Vector3::new(0.5, 0.5, 0.0)));
        assert!(!prim.contains(&Vector3::new(1.5, 1.5, 0.0)));
    }
}
