use nalgebra::Vector3;

use super::WorkspaceBounds;

/// Obstacle geometry the occupancy grid is rasterized from. Planar
/// environments use zero z components throughout.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Sphere {
        center: Vector3<f64>,
        radius: f64,
    },
    Box {
        center: Vector3<f64>,
        half_extents: Vector3<f64>,
    },
    /// Occupies exactly the voxel containing `center`.
    Point {
        center: Vector3<f64>,
    },
    /// Occupies `{x : normal . x <= offset}`.
    HalfSpace {
        normal: Vector3<f64>,
        offset: f64,
    },
    /// 2-D mask; `rows[0]` is the top row (largest y). `origin` is the
    /// lower-left corner of the mask and `resolution` its cell size.
    Bitmap {
        rows: Vec<Vec<bool>>,
        origin: Vector3<f64>,
        resolution: f64,
    },
}

impl Primitive {
    pub fn sphere(center: Vector3<f64>, radius: f64) -> Self {
        Primitive::Sphere { center, radius }
    }

    pub fn cuboid(center: Vector3<f64>, half_extents: Vector3<f64>) -> Self {
        Primitive::Box { center, half_extents }
    }

    pub fn point(center: Vector3<f64>) -> Self {
        Primitive::Point { center }
    }

    pub fn half_space(normal: Vector3<f64>, offset: f64) -> Self {
        Primitive::HalfSpace { normal, offset }
    }

    /// Parse a mask from text rows where `#` marks an occupied cell.
    pub fn bitmap_from_text<S: AsRef<str>>(rows: &[S], origin: Vector3<f64>, resolution: f64) -> Self {
        let rows = rows.iter().map(|r| r.as_ref().chars().map(|c| c == '#').collect()).collect();
        Primitive::Bitmap { rows, origin, resolution }
    }

    /// Describe the first violated parameter invariant, if any.
    pub fn check(&self) -> Result<(), String> {
        match self {
            Primitive::Sphere { radius, .. } if !(*radius >= 0.0) => Err("sphere radius must be nonnegative".into()),
            Primitive::Box { half_extents, .. } if half_extents.iter().any(|h| !(*h >= 0.0)) => {
                Err("box half extents must be nonnegative".into())
            }
            Primitive::HalfSpace { normal, .. } if (normal.norm() - 1.0).abs() > 1e-9 => {
                Err("half-space normal must be unit length".into())
            }
            Primitive::Bitmap { resolution, .. } if !(*resolution > 0.0) => {
                Err("bitmap resolution must be positive".into())
            }
            Primitive::Bitmap { rows, .. } if rows.windows(2).any(|w| w[0].len() != w[1].len()) => {
                Err("bitmap rows must have equal length".into())
            }
            _ => Ok(()),
        }
    }

    /// Whether a workspace point lies inside the primitive. Points are
    /// handled by the rasterizer, not here.
    pub fn contains(&self, x: &Vector3<f64>) -> bool {
        match self {
            Primitive::Sphere { center, radius } => (x - center).norm_squared() <= radius * radius,
            Primitive::Box { center, half_extents } => {
                let d = x - center;
                d.x.abs() <= half_extents.x && d.y.abs() <= half_extents.y && d.z.abs() <= half_extents.z
            }
            Primitive::Point { .. } => false,
            Primitive::HalfSpace { normal, offset } => normal.dot(x) <= *offset,
            Primitive::Bitmap { rows, origin, resolution } => {
                let col = ((x.x - origin.x) / resolution).floor();
                let from_bottom = ((x.y - origin.y) / resolution).floor();
                if col < 0.0 || from_bottom < 0.0 {
                    return false;
                }
                let (col, from_bottom) = (col as usize, from_bottom as usize);
                if from_bottom >= rows.len() {
                    return false;
                }
                let row = &rows[rows.len() - 1 - from_bottom];
                row.get(col).copied().unwrap_or(false)
            }
        }
    }

    /// Whether the primitive reaches into the workspace box at all.
    pub fn touches(&self, bounds: &WorkspaceBounds) -> bool {
        let (lo, hi) = (bounds.min, bounds.max);
        let active = bounds.dim.arity();
        let overlap = |a: Vector3<f64>, b: Vector3<f64>| (0..active).all(|i| a[i] <= hi[i] && b[i] >= lo[i]);
        match self {
            Primitive::Sphere { center, radius } => {
                let r = Vector3::repeat(*radius);
                overlap(center - r, center + r)
            }
            Primitive::Box { center, half_extents } => overlap(center - half_extents, center + half_extents),
            Primitive::Point { center } => bounds.contains(center),
            Primitive::HalfSpace { normal, offset } => bounds.corners().iter().any(|c| normal.dot(c) <= *offset),
            Primitive::Bitmap { rows, origin, resolution } => {
                let width = rows.first().map_or(0, |r| r.len()) as f64 * resolution;
                let height = rows.len() as f64 * resolution;
                overlap(*origin, origin + Vector3::new(width, height, 0.0))
            }
        }
    }
}
