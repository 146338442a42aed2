//! Triangle meshes of the truncated exterior domain.

mod build;
mod spec;
mod svg;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use build::build_mesh;
pub use spec::{default_spec, ArtificialBc, TruncationSpec};
pub use svg::mesh_svg;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, ConvexPolygon, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeTag {
    /// On polygon side `n` (0-based).
    RobinWall(usize),
    Artificial,
}

impl EdgeTag {
    /// External label: `R<side>` with a 1-based side, or `A`.
    pub fn label(self) -> String {
        match self {
            EdgeTag::RobinWall(n) => format!("R{}", n + 1),
            EdgeTag::Artificial => "A".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "A" {
            return Ok(EdgeTag::Artificial);
        }
        let side: usize = s
            .strip_prefix('R')
            .and_then(|n| n.parse().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Parse(format!("unknown edge tag {s:?}")))?;
        Ok(EdgeTag::RobinWall(side - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: EdgeTag,
}

/// Conforming P1 triangulation with tagged boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub nodes: Vec<Vec2>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
    /// `(node, polygon vertex)` pairs for nodes sitting on a polygon corner.
    pub corners: Vec<(usize, usize)>,
}

pub fn triangle_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriangleMesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| triangle_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]))
            .sum()
    }

    pub fn tagged_length(&self, pred: impl Fn(EdgeTag) -> bool) -> f64 {
        self.boundary
            .iter()
            .filter(|e| pred(e.tag))
            .map(|e| self.nodes[e.nodes[0]].dist(self.nodes[e.nodes[1]]))
            .sum()
    }

    pub fn robin_length(&self) -> f64 {
        self.tagged_length(|t| matches!(t, EdgeTag::RobinWall(_)))
    }

    /// Longest edge of each triangle.
    pub fn diameters(&self) -> Vec<f64> {
        self.triangles
            .iter()
            .map(|t| {
                let p = t.map(|i| self.nodes[i]);
                p[0].dist(p[1]).max(p[1].dist(p[2])).max(p[2].dist(p[0]))
            })
            .collect()
    }

    pub fn max_diameter(&self) -> f64 {
        self.diameters().into_iter().fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in &self.triangles {
            let p = t.map(|i| self.nodes[i]);
            for k in 0..3 {
                let a = p[(k + 1) % 3] - p[k];
                let b = p[(k + 2) % 3] - p[k];
                let ang = a.cross(b).abs().atan2(a.dot(b));
                min = min.min(ang);
            }
        }
        min.to_degrees()
    }

    /// Number of triangles sharing each edge.
    fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *count.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        count
    }

    /// Checks orientation, manifoldness, boundary tagging and closed boundary
    /// loops. With a polygon, also checks that wall edges lie on their side.
    pub fn validate(&self, polygon: Option<&ConvexPolygon>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMesh(m));
        let n = self.nodes.len();
        if self.triangles.is_empty() {
            return bad("mesh has no triangles".into());
        }
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= n) {
                return bad(format!("triangle {k} references a missing node"));
            }
            let a = triangle_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
            if !(a > 0.0) {
                return bad(format!("triangle {k} has non-positive area {a}"));
            }
        }
        let inc = self.edge_incidence();
        if let Some((e, c)) = inc.iter().find(|(_, &c)| c > 2) {
            return bad(format!("edge {e:?} is shared by {c} triangles"));
        }
        let open: std::collections::HashSet<(usize, usize)> =
            inc.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
        let tagged: std::collections::HashSet<(usize, usize)> = self
            .boundary
            .iter()
            .map(|e| edge_key(e.nodes[0], e.nodes[1]))
            .collect();
        if open != tagged || tagged.len() != self.boundary.len() {
            return bad(format!(
                "{} open edges but {} tagged boundary edges",
                open.len(),
                self.boundary.len()
            ));
        }
        let mut degree = vec![0usize; n];
        for e in &self.boundary {
            degree[e.nodes[0]] += 1;
            degree[e.nodes[1]] += 1;
        }
        if degree.iter().any(|&d| d != 0 && d != 2) {
            return bad("tagged boundary edges do not form closed loops".into());
        }
        if let Some(p) = polygon {
            let scale = p.perimeter();
            for e in &self.boundary {
                if let EdgeTag::RobinWall(side) = e.tag {
                    if side >= p.vertex_count() {
                        return bad(format!("wall tag for missing side {side}"));
                    }
                    let (a, b) = (p.vertex(side), p.vertex(side + 1));
                    for &i in &e.nodes {
                        if point_segment_distance(self.nodes[i], a, b) > 1e-10 * scale.max(1.0) {
                            return bad(format!("wall edge node {i} is off side {side}"));
                        }
                    }
                }
            }
            for &(node, vertex) in &self.corners {
                if self.nodes[node].dist(p.vertex(vertex)) > 1e-12 * scale.max(1.0) {
                    return bad(format!("corner node {node} is not at vertex {vertex}"));
                }
            }
        }
        Ok(())
    }

    /// Uniform red refinement: every triangle splits into four through its
    /// edge midpoints. Tags pass to the two halves of each boundary edge.
    pub fn refine(&self) -> TriangleMesh {
        let mut nodes = self.nodes.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Vec2>| -> usize {
            *mid.entry(edge_key(a, b)).or_insert_with(|| {
                let p = (nodes[a] + nodes[b]) * 0.5;
                nodes.push(p);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let [a, b, c] = *t;
            let ab = midpoint(a, b, &mut nodes);
            let bc = midpoint(b, c, &mut nodes);
            let ca = midpoint(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary.len());
        for e in &self.boundary {
            let [a, b] = e.nodes;
            let m = midpoint(a, b, &mut nodes);
            boundary.push(BoundaryEdge { nodes: [a, m], tag: e.tag });
            boundary.push(BoundaryEdge { nodes: [m, b], tag: e.tag });
        }
        TriangleMesh {
            nodes,
            triangles,
            boundary,
            corners: self.corners.clone(),
        }
    }

    /// Nodes touched by at least one boundary edge with the given tag.
    pub fn nodes_with_tag(&self, pred: impl Fn(EdgeTag) -> bool) -> Vec<bool> {
        let mut flag = vec![false; self.nodes.len()];
        for e in self.boundary.iter().filter(|e| pred(e.tag)) {
            flag[e.nodes[0]] = true;
            flag[e.nodes[1]] = true;
        }
        flag
    }

    /// Plain-text export: node count, `x y` lines, triangle count, `i j k`
    /// lines, boundary edge count, `i j tag` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(out, "{} {}", p.x, p.y);
        }
        let _ = writeln!(out, "{}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(out, "{}", self.boundary.len());
        for e in &self.boundary {
            let _ = writeln!(out, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.label());
        }
        out
    }

    /// Inverse of [`TriangleMesh::to_text`]. Corner tags are not part of the
    /// format; pass the polygon to recover them.
    pub fn from_text(text: &str, polygon: Option<&ConvexPolygon>) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of mesh file reading {what}")))
        };
        fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
            s.parse()
                .map_err(|_| Error::Parse(format!("cannot parse {s:?} as a number")))
        }
        let n: usize = num(next("node count")?)?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let l = next("node")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::Parse(format!("node line {l:?} needs 2 fields")));
            }
            nodes.push(Vec2::new(num(f[0])?, num(f[1])?));
        }
        let nt: usize = num(next("triangle count")?)?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let l = next("triangle")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("triangle line {l:?} needs 3 fields")));
            }
            triangles.push([num(f[0])?, num(f[1])?, num(f[2])?]);
        }
        let nb: usize = num(next("boundary edge count")?)?;
        let mut boundary = Vec::with_capacity(nb);
        for _ in 0..nb {
            let l = next("boundary edge")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("boundary line {l:?} needs 3 fields")));
            }
            boundary.push(BoundaryEdge {
                nodes: [num(f[0])?, num(f[1])?],
                tag: EdgeTag::parse(f[2])?,
            });
        }
        let mut corners = Vec::new();
        if let Some(p) = polygon {
            for (i, x) in nodes.iter().enumerate() {
                for (v, a) in p.vertices().iter().enumerate() {
                    if x.dist(*a) <= 1e-12 * p.perimeter().max(1.0) {
                        corners.push((i, v));
                    }
                }
            }
        }
        let mesh = TriangleMesh {
            nodes,
            triangles,
            boundary,
            corners,
        };
        mesh.validate(polygon)?;
        Ok(mesh)
    }
}

/// Structured mesh of the unit square with `n x n` cells, each cut along its
/// diagonal. The whole boundary is tagged artificial.
pub fn square_mesh(n: usize) -> TriangleMesh {
    let n = n.max(1);
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push(Vec2::new(i as f64 * h, j as f64 * h));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut boundary = Vec::with_capacity(4 * n);
    for k in 0..n {
        boundary.push([id(k, 0), id(k + 1, 0)]);
        boundary.push([id(n, k), id(n, k + 1)]);
        boundary.push([id(k + 1, n), id(k, n)]);
        boundary.push([id(0, k + 1), id(0, k)]);
    }
    TriangleMesh {
        nodes,
        triangles,
        boundary: boundary
            .into_iter()
            .map(|nodes| BoundaryEdge {
                nodes,
                tag: EdgeTag::Artificial,
            })
            .collect(),
        corners: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_mesh_is_valid() {
        let m = square_mesh(4);
        m.validate(None).unwrap();
        assert_eq!(m.triangle_count(), 32);
        assert!((m.area() - 1.0).abs() < 1e-14);
        assert!((m.tagged_length(|_| true) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn refine_combinatorics() {
        let m = square_mesh(3);
        let r = m.refine();
        r.validate(None).unwrap();
        assert_eq!(r.triangle_count(), 4 * m.triangle_count());
        assert_eq!(r.boundary.len(), 2 * m.boundary.len());
        assert!((r.max_diameter() - 0.5 * m.max_diameter()).abs() < 1e-14);
        let rr = r.refine();
        assert_eq!(rr.triangle_count(), 16 * m.triangle_count());
        assert!((rr.area() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn text_roundtrip() {
        let m = square_mesh(2);
        let back = TriangleMesh::from_text(&m.to_text(), None).unwrap();
        assert_eq!(back, m);
        assert!(TriangleMesh::from_text("3\n0 0\n", None).is_err());
    }

    #[test]
    fn validation_catches_defects() {
        let mut m = square_mesh(2);
        m.triangles[0].swap(1, 2);
        assert!(m.validate(None).is_err());
        let mut m = square_mesh(2);
        m.boundary.pop();
        assert!(m.validate(None).is_err());
    }

    #[test]
    fn tag_labels() {
        assert_eq!(EdgeTag::RobinWall(0).label(), "R1");
        assert_eq!(EdgeTag::parse("R3").unwrap(), EdgeTag::RobinWall(2));
        assert_eq!(EdgeTag::parse("A").unwrap(), EdgeTag::Artificial);
        assert!(EdgeTag::parse("R0").is_err());
        assert!(EdgeTag::parse("X").is_err());
    }
}
