//! Convex polygon geometry and the decomposition of its exterior into
//! half-strips over the sides and sectors at the vertices.
//!
//! Vertices are stored counterclockwise, so the outward normal of the polygon
//! on each side points into the exterior domain. Side `n` joins vertex `n`
//! to vertex `n + 1` (indices modulo the vertex count); all indices are
//! zero-based.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance band used by [`Decomposition::locate`].
pub const LOCATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec2 {
        self * (1.0 / self.norm())
    }

    /// Rotation by -90 degrees.
    pub fn rot_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(p: [f64; 2]) -> Self {
        Vec2::new(p[0], p[1])
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonFile", into = "PolygonFile")]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
    lengths: Vec<f64>,
}

/// On-disk polygon description: `{"vertices": [[x, y], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolygonFile {
    pub vertices: Vec<[f64; 2]>,
}

impl TryFrom<PolygonFile> for ConvexPolygon {
    type Error = Error;

    fn try_from(file: PolygonFile) -> Result<Self> {
        Self::from_points(&file.vertices)
    }
}

impl From<ConvexPolygon> for PolygonFile {
    fn from(p: ConvexPolygon) -> Self {
        PolygonFile {
            vertices: p.vertices.iter().map(|v| [v.x, v.y]).collect(),
        }
    }
}

impl ConvexPolygon {
    /// Validates a vertex loop and normalizes it to counterclockwise order.
    ///
    /// The first vertex is kept in place when the orientation is flipped.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(Error::TooFewVertices(m));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite vertex {p}")));
        }
        let (lo, hi) = bbox(&vertices);
        let scale = (hi - lo).norm();
        if scale == 0.0 {
            return Err(Error::CollinearVertex { vertex: 1 });
        }
        let eps = 1e-12 * scale * scale;

        let mut verts = vertices;
        if signed_area(&verts) < 0.0 {
            verts[1..].reverse();
        }

        for n in 0..m {
            let prev = verts[(n + m - 1) % m];
            let cur = verts[n];
            let next = verts[(n + 1) % m];
            let turn = (cur - prev).cross(next - cur);
            if turn.abs() <= eps {
                // A zero turn is either a vertex on the chord of its
                // neighbours or a spike doubling back on itself.
                let along = (cur - prev).dot(next - prev);
                if along >= -eps && along <= (next - prev).norm_sq() + eps {
                    return Err(Error::CollinearVertex { vertex: n });
                }
                return Err(Error::NotConvex { vertex: n });
            }
            if turn < 0.0 {
                return Err(Error::NotConvex { vertex: n });
            }
        }

        let lengths: Vec<f64> = (0..m).map(|n| verts[n].dist(verts[(n + 1) % m])).collect();
        let poly = Self { vertices: verts, lengths };

        // All turns positive but winding more than once (a star polygon).
        let turning: f64 = (0..m).map(|n| poly.exterior_angle(n)).sum();
        if (turning - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::NotConvex { vertex: 0 });
        }
        Ok(poly)
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().copied().map(Vec2::from).collect())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: PolygonFile =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("polygon file: {e}")))?;
        Self::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polygon serializes")
    }

    /// Regular polygon with `m` sides of length `side`, first side horizontal.
    pub fn regular(m: usize, side: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::TooFewVertices(m));
        }
        let mut p = Vec2::ZERO;
        let mut verts = Vec::with_capacity(m);
        for k in 0..m {
            verts.push(p);
            p = p + Vec2::new(side, 0.0).rotated(2.0 * PI * k as f64 / m as f64);
        }
        Self::new(verts)
    }

    pub fn equilateral(side: f64) -> Self {
        Self::regular(3, side).expect("valid triangle")
    }

    pub fn unit_square() -> Self {
        Self::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).expect("valid square")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex(&self, n: usize) -> Vec2 {
        self.vertices[n % self.vertices.len()]
    }

    pub fn side_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn min_side(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_side(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn perimeter(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vec2 {
        let m = self.vertices.len();
        let mut c = Vec2::ZERO;
        let mut a = 0.0;
        for n in 0..m {
            let p = self.vertices[n];
            let q = self.vertices[(n + 1) % m];
            let w = p.cross(q);
            a += w;
            c = c + (p + q) * w;
        }
        c * (1.0 / (3.0 * a))
    }

    /// Unit tangent of side `n`, pointing from vertex `n` to vertex `n + 1`.
    pub fn tangent(&self, n: usize) -> Vec2 {
        let m = self.vertices.len();
        (self.vertices[(n + 1) % m] - self.vertices[n % m]).normalized()
    }

    /// Unit normal of side `n` pointing away from the polygon.
    pub fn outward_normal(&self, n: usize) -> Vec2 {
        self.tangent(n).rot_cw()
    }

    /// Opening of the exterior sector at vertex `n`: pi minus the interior angle.
    pub fn exterior_angle(&self, n: usize) -> f64 {
        let m = self.vertices.len();
        let a = self.outward_normal((n + m - 1) % m);
        let b = self.outward_normal(n);
        a.cross(b).atan2(a.dot(b))
    }

    /// Signed distance to the boundary: negative inside, positive outside.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        let m = self.vertices.len();
        let mut inside_max = f64::NEG_INFINITY;
        let mut dist = f64::INFINITY;
        for n in 0..m {
            let a = self.vertices[n];
            let b = self.vertices[(n + 1) % m];
            inside_max = inside_max.max((x - a).dot(self.outward_normal(n)));
            dist = dist.min(point_segment_distance(x, a, b));
        }
        if inside_max < 0.0 {
            -dist
        } else {
            dist
        }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        let m = self.vertices.len();
        (0..m).all(|n| (x - self.vertices[n]).dot(self.outward_normal(n)) < 0.0)
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        bbox(&self.vertices)
    }

    /// Applies `x -> scale * R(angle) x + shift` to every vertex.
    pub fn transformed(&self, angle: f64, scale: f64, shift: Vec2) -> Result<Self> {
        Self::new(
            self.vertices
                .iter()
                .map(|v| v.rotated(angle) * scale + shift)
                .collect(),
        )
    }
}

fn bbox(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

fn signed_area(points: &[Vec2]) -> f64 {
    let m = points.len();
    0.5 * (0..m).map(|n| points[n].cross(points[(n + 1) % m])).sum::<f64>()
}

pub fn point_segment_distance(x: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let t = ((x - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
    x.dist(a + d * t)
}

/// Local frame of side `n`: `map(t, s) = origin + t * tangent + s * normal`
/// sends `(0, len) x (0, inf)` onto the half-strip over the side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideFrame {
    pub index: usize,
    pub length: f64,
    pub origin: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
}

impl SideFrame {
    pub fn map(&self, t: f64, s: f64) -> Vec2 {
        self.origin + self.tangent * t + self.normal * s
    }

    /// Inverse of [`SideFrame::map`].
    pub fn coords(&self, x: Vec2) -> (f64, f64) {
        let d = x - self.origin;
        (d.dot(self.tangent), d.dot(self.normal))
    }
}

/// Infinite sector at vertex `n`, bounded by the normal rays of the two
/// adjacent sides. `ray_start` is the normal of side `n - 1` and the sector
/// sweeps counterclockwise through `opening` radians to `ray_end`, the normal
/// of side `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub vertex: usize,
    pub apex: Vec2,
    pub opening: f64,
    pub ray_start: Vec2,
    pub ray_end: Vec2,
}

impl Sector {
    /// A free-standing sector with the given apex, first ray and opening.
    pub fn new(apex: Vec2, ray_start: Vec2, opening: f64) -> Result<Self> {
        if !(opening > 0.0 && opening < 2.0 * PI) {
            return Err(Error::AngleOutOfRange(opening));
        }
        let start = ray_start.normalized();
        Ok(Self {
            vertex: 0,
            apex,
            opening,
            ray_start: start,
            ray_end: start.rotated(opening),
        })
    }

    /// Point at polar coordinates `(r, phi)`, `phi` measured from `ray_start`.
    pub fn point(&self, r: f64, phi: f64) -> Vec2 {
        self.apex + self.ray_start.rotated(phi) * r
    }

    pub fn contains_strict(&self, x: Vec2) -> bool {
        let v = x - self.apex;
        if v.norm() == 0.0 {
            return false;
        }
        let phi = self.ray_start.cross(v).atan2(self.ray_start.dot(v));
        let phi = if phi < 0.0 { phi + 2.0 * PI } else { phi };
        phi > 0.0 && phi < self.opening
    }
}

/// Region tag returned by [`Decomposition::locate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Interior,
    Strip { side: usize, t: f64, s: f64 },
    Sector { vertex: usize },
    /// On the polygon boundary or on a strip/sector interface, within tolerance.
    Boundary,
}

/// The half-strips and sectors covering the exterior of a polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub polygon: ConvexPolygon,
    pub frames: Vec<SideFrame>,
    pub sectors: Vec<Sector>,
}

pub fn decompose(polygon: &ConvexPolygon) -> Decomposition {
    let m = polygon.vertex_count();
    let frames = (0..m)
        .map(|n| SideFrame {
            index: n,
            length: polygon.side_lengths()[n],
            origin: polygon.vertex(n),
            tangent: polygon.tangent(n),
            normal: polygon.outward_normal(n),
        })
        .collect();
    let sectors = (0..m)
        .map(|n| Sector {
            vertex: n,
            apex: polygon.vertex(n),
            opening: polygon.exterior_angle(n),
            ray_start: polygon.outward_normal((n + m - 1) % m),
            ray_end: polygon.outward_normal(n),
        })
        .collect();
    Decomposition {
        polygon: polygon.clone(),
        frames,
        sectors,
    }
}

impl Decomposition {
    pub fn side_count(&self) -> usize {
        self.frames.len()
    }

    pub fn locate(&self, x: Vec2) -> Region {
        let tol = LOCATE_TOL;
        let poly = &self.polygon;
        let m = self.frames.len();
        let heights: Vec<f64> = self.frames.iter().map(|f| f.coords(x).1).collect();
        if heights.iter().all(|&s| s < -tol) {
            return Region::Interior;
        }
        for f in &self.frames {
            let (t, s) = f.coords(x);
            if s > tol && t > tol && t < f.length - tol {
                return Region::Strip { side: f.index, t, s };
            }
        }
        for sec in &self.sectors {
            let v = x - sec.apex;
            if v.norm() > tol && sec.ray_start.cross(v) > tol && v.cross(sec.ray_end) > tol {
                return Region::Sector { vertex: sec.vertex };
            }
        }
        debug_assert!(m == poly.vertex_count());
        Region::Boundary
    }

    /// Every region whose open set contains `x`, without tolerance. Used to
    /// check that the pieces do not overlap.
    pub fn regions_containing(&self, x: Vec2) -> Vec<Region> {
        let mut out = Vec::new();
        if self.polygon.contains(x) {
            out.push(Region::Interior);
        }
        for f in &self.frames {
            let (t, s) = f.coords(x);
            if s > 0.0 && t > 0.0 && t < f.length {
                out.push(Region::Strip { side: f.index, t, s });
            }
        }
        for sec in &self.sectors {
            if sec.contains_strict(x) {
                out.push(Region::Sector { vertex: sec.vertex });
            }
        }
        out
    }

    /// Constant of the sector trace inequality valid for every sector of
    /// this polygon: the largest `C_theta` over the vertex openings.
    pub fn sector_trace_constant(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| crate::variational::trace_constant(s.opening).expect("opening in (0, pi)"))
            .fold(0.0, f64::max)
    }
}
