//! Boundary geometry in `R^3`: meshes, Whitney cubes, box counting, jets and
//! Whitney extension.

pub mod bvh;
pub mod dimension;
pub mod extension;
pub mod jet;
pub mod kdtree;
pub mod mesh;
pub mod prism;
pub mod whitney;

pub use dimension::{box_dimension_estimate, covering_number, d_summability_integral, BoxDimension};
pub use extension::WhitneyExtension;
pub use jet::{compatibility_residual, jet_from_function, CompatibilityReport, JetSample, LipschitzJet};
pub use mesh::{build_boundary_mesh, BoundaryMesh, FractalDescriptor, GeometryFamily};
pub use prism::{d_sum_trend, whitney_counts, DSumTrend, ExtrudedPolygon, Polygon};
pub use whitney::{d_sum, d_sum_from_counts, whitney_decompose, Cube, DSumReport, WhitneyCubeSet};

pub type P3 = [f64; 3];

#[inline]
pub fn sub(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &P3, b: &P3) -> P3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &P3, s: f64) -> P3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: &P3, b: &P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &P3, b: &P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &P3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &P3, b: &P3) -> f64 {
    norm(&sub(a, b))
}

pub fn to_p3(x: &[f64]) -> P3 {
    assert_eq!(x.len(), 3, "geometry is three-dimensional");
    [x[0], x[1], x[2]]
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: P3,
    pub max: P3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn grow(&mut self, p: &P3) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn merge(&mut self, o: &Aabb) {
        self.grow(&o.min);
        self.grow(&o.max);
    }

    pub fn center(&self) -> P3 {
        scale(&add(&self.min, &self.max), 0.5)
    }

    pub fn extent(&self) -> P3 {
        sub(&self.max, &self.min)
    }

    /// Squared distance from `p` to the box (0 inside).
    pub fn dist2(&self, p: &P3) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let v = (self.min[k] - p[k]).max(0.0).max(p[k] - self.max[k]);
            d += v * v;
        }
        d
    }

    /// Circumradius about the center.
    pub fn circumradius(&self) -> f64 {
        0.5 * norm(&self.extent())
    }
}

/// A bounded open set `Ω ⊂ R^3` with a boundary-distance oracle.
pub trait Domain: Send + Sync {
    fn contains(&self, x: &P3) -> bool;
    /// Euclidean distance from `x` to the boundary `Γ`.
    fn boundary_distance(&self, x: &P3) -> f64;
    fn bbox(&self) -> Aabb;
}

/// Analytic ball.
#[derive(Clone, Copy, Debug)]
pub struct Ball {
    pub center: P3,
    pub radius: f64,
}

impl Domain for Ball {
    fn contains(&self, x: &P3) -> bool {
        dist(x, &self.center) < self.radius
    }

    fn boundary_distance(&self, x: &P3) -> f64 {
        (dist(x, &self.center) - self.radius).abs()
    }

    fn bbox(&self) -> Aabb {
        let r = [self.radius; 3];
        Aabb {
            min: sub(&self.center, &r),
            max: add(&self.center, &r),
        }
    }
}

/// Analytic axis-aligned box `(min, max)`.
#[derive(Clone, Copy, Debug)]
pub struct BoxDomain(pub Aabb);

impl BoxDomain {
    pub fn unit_cube() -> Self {
        Self(Aabb {
            min: [0.0; 3],
            max: [1.0; 3],
        })
    }
}

impl Domain for BoxDomain {
    fn contains(&self, x: &P3) -> bool {
        (0..3).all(|k| x[k] > self.0.min[k] && x[k] < self.0.max[k])
    }

    fn boundary_distance(&self, x: &P3) -> f64 {
        if self.contains(x) {
            (0..3)
                .map(|k| (x[k] - self.0.min[k]).min(self.0.max[k] - x[k]))
                .fold(f64::INFINITY, f64::min)
        } else {
            self.0.dist2(x).sqrt()
        }
    }

    fn bbox(&self) -> Aabb {
        self.0
    }
}
