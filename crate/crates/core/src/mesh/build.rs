use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use spade::handles::{FixedFaceHandle, FixedVertexHandle, InnerTag};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};
use tracing::debug;

use super::{BoundaryEdge, EdgeTag, TriangleMesh, TruncationSpec};
use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, ConvexPolygon, Vec2};

type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

/// Growth rate of the cell size away from the boundary layer.
const GROWTH: f64 = 0.2;
const MIN_ANGLE_DEG: f64 = 15.0;
const MAX_PASSES: usize = 200;

struct SizeField<'a> {
    polygon: &'a ConvexPolygon,
    spec: &'a TruncationSpec,
}

impl SizeField<'_> {
    /// Size at distance `d` from the polygon, ignoring the corners.
    fn base(&self, d: f64) -> f64 {
        let s = self.spec;
        let layer = 3.0 * s.boundary_cell;
        if d <= layer {
            s.boundary_cell
        } else {
            (s.boundary_cell + GROWTH * (d - layer)).min(s.interior_cell)
        }
    }

    fn at(&self, x: Vec2) -> f64 {
        let s = self.spec;
        let base = self.base(self.polygon.signed_distance(x).max(0.0));
        if s.grading_levels == 0 {
            return base;
        }
        let dv = self
            .polygon
            .vertices()
            .iter()
            .map(|v| v.dist(x))
            .fold(f64::INFINITY, f64::min);
        if dv < s.boundary_cell {
            let floor = s.boundary_cell * s.grading_ratio.powi(s.grading_levels as i32);
            base.min(dv.max(floor))
        } else {
            base
        }
    }
}

/// Points along side `n`, graded geometrically towards both corners.
fn side_points(polygon: &ConvexPolygon, spec: &TruncationSpec, n: usize) -> Vec<Vec2> {
    let a = polygon.vertex(n);
    let b = polygon.vertex(n + 1);
    let len = polygon.side_lengths()[n];
    let h = spec.boundary_cell;
    let mut near: Vec<f64> = (1..=spec.grading_levels)
        .rev()
        .map(|k| h * spec.grading_ratio.powi(k as i32))
        .collect();
    near.push(h);
    if spec.grading_levels == 0 {
        near.clear();
    }
    let edge = near.last().copied().unwrap_or(0.0);
    let middle = len - 2.0 * edge;
    let cells = (middle / h).ceil().max(1.0) as usize;
    let mut ts: Vec<f64> = vec![0.0];
    ts.extend(near.iter().copied());
    for k in 1..cells {
        ts.push(edge + middle * k as f64 / cells as f64);
    }
    ts.extend(near.iter().rev().map(|d| len - d));
    ts.into_iter()
        .map(|t| {
            if t == 0.0 {
                a
            } else {
                a + (b - a) * (t / len)
            }
        })
        .collect()
}

/// Closed polyline approximating the offset curve at distance `offset`,
/// with corner arcs replaced by inscribed chords and no segment longer than
/// `outer_cell`.
fn outer_points(polygon: &ConvexPolygon, spec: &TruncationSpec, outer_cell: f64) -> Vec<Vec2> {
    let r = spec.offset;
    let chord_err = spec.interior_cell / 4.0;
    let step = if chord_err >= r {
        PI / 2.0
    } else {
        2.0 * (1.0 - chord_err / r).acos()
    };
    let max_seg = outer_cell.min(r * step);
    let m = polygon.vertex_count();
    let mut corner_polylines = Vec::with_capacity(m);
    for n in 0..m {
        let apex = polygon.vertex(n);
        let start = polygon.outward_normal((n + m - 1) % m);
        let opening = polygon.exterior_angle(n);
        let chord_step = (max_seg / r).min(step);
        let k = (opening / chord_step).ceil().max(1.0) as usize;
        let mut pts = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let dir = if j == k {
                polygon.outward_normal(n)
            } else {
                start.rotated(opening * j as f64 / k as f64)
            };
            pts.push(apex + dir * r);
        }
        corner_polylines.push(pts);
    }
    let mut out = Vec::new();
    for n in 0..m {
        out.extend(corner_polylines[n].iter().copied());
        let a = *corner_polylines[n].last().expect("arc has points");
        let b = corner_polylines[(n + 1) % m][0];
        let len = a.dist(b);
        let k = (len / max_seg).ceil().max(1.0) as usize;
        for j in 1..k {
            out.push(a + (b - a) * (j as f64 / k as f64));
        }
    }
    out
}

fn insert(cdt: &mut Cdt, p: Vec2) -> Result<FixedVertexHandle> {
    cdt.insert(Point2::new(p.x, p.y))
        .map_err(|e| Error::InvalidMesh(format!("cannot insert point {p}: {e:?}")))
}

fn add_loop(cdt: &mut Cdt, pts: &[Vec2]) -> Result<()> {
    let handles = pts
        .iter()
        .map(|&p| insert(cdt, p))
        .collect::<Result<Vec<_>>>()?;
    for k in 0..handles.len() {
        let (a, b) = (handles[k], handles[(k + 1) % handles.len()]);
        if !cdt.can_add_constraint(a, b) {
            return Err(Error::InvalidMesh("boundary constraints intersect".into()));
        }
        cdt.add_constraint(a, b);
    }
    Ok(())
}

fn pos(p: Point2<f64>) -> Vec2 {
    Vec2::new(p.x, p.y)
}

/// Faces of the meshed region: everything the last refinement did not
/// classify as outside the boundary loops.
fn domain_faces(cdt: &Cdt, excluded: &HashSet<FixedFaceHandle<InnerTag>>) -> Vec<FixedFaceHandle<InnerTag>> {
    cdt.inner_faces()
        .map(|f| f.fix())
        .filter(|f| !excluded.contains(f))
        .collect()
}

/// Triangulates `{x outside the polygon : dist(x, polygon) < offset}`, with
/// the outer boundary replaced by an inscribed polyline.
pub fn build_mesh(polygon: &ConvexPolygon, spec: &TruncationSpec) -> Result<TriangleMesh> {
    spec.validate(polygon)?;
    let m = polygon.vertex_count();
    let mut cdt = Cdt::new();
    let mut wall: Vec<Vec2> = Vec::new();
    for n in 0..m {
        let pts = side_points(polygon, spec, n);
        wall.extend(&pts[..pts.len() - 1]);
    }
    add_loop(&mut cdt, &wall)?;
    let size = SizeField { polygon, spec };
    let outer_pts = outer_points(polygon, spec, size.base(spec.offset));
    add_loop(&mut cdt, &outer_pts)?;

    let params = || {
        RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(25.0))
            .exclude_outer_faces(true)
            .with_max_additional_vertices(2_000_000)
    };
    let mut excluded: HashSet<_> = cdt.refine(params()).excluded_faces.into_iter().collect();
    let mut passes = 0;
    loop {
        let faces = domain_faces(&cdt, &excluded);
        let pending: Vec<Vec2> = faces
            .iter()
            .filter_map(|&f| {
                let p = cdt.face(f).positions().map(pos);
                let diam = p[0].dist(p[1]).max(p[1].dist(p[2])).max(p[2].dist(p[0]));
                let h = p.iter().map(|&x| size.at(x)).fold(f64::INFINITY, f64::min);
                (diam > h * (1.0 + 1e-9)).then(|| (p[0] + p[1] + p[2]) * (1.0 / 3.0))
            })
            .collect();
        debug!(pass = passes, faces = faces.len(), pending = pending.len(), "mesh sizing pass");
        if pending.is_empty() {
            break;
        }
        passes += 1;
        if passes > MAX_PASSES {
            return Err(Error::InvalidMesh("size field refinement did not terminate".into()));
        }
        for p in pending {
            insert(&mut cdt, p)?;
        }
        excluded = cdt.refine(params()).excluded_faces.into_iter().collect();
    }
    extract(&cdt, &domain_faces(&cdt, &excluded), polygon)
}

fn extract(cdt: &Cdt, domain: &[FixedFaceHandle<InnerTag>], polygon: &ConvexPolygon) -> Result<TriangleMesh> {
    let faces: Vec<[usize; 3]> = domain
        .iter()
        .map(|&f| cdt.face(f).vertices().map(|v| v.fix().index()))
        .collect();
    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let positions: HashMap<usize, Vec2> = cdt
        .vertices()
        .map(|v| (v.fix().index(), pos(v.position())))
        .collect();
    used.sort_by(|&a, &b| {
        let (pa, pb) = (positions[&a], positions[&b]);
        pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y)).then(a.cmp(&b))
    });
    let renumber: HashMap<usize, usize> = used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
    let nodes: Vec<Vec2> = used.iter().map(|i| positions[i]).collect();
    let mut triangles: Vec<[usize; 3]> = faces
        .iter()
        .map(|t| {
            let mut t = t.map(|i| renumber[&i]);
            if super::triangle_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
                t.swap(1, 2);
            }
            t
        })
        .collect();
    triangles.sort_unstable();

    let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = if a < b { (a, b) } else { (b, a) };
            count.entry(key).or_insert((0, [a, b])).0 += 1;
        }
    }
    let scale = polygon.perimeter().max(1.0);
    let mut boundary: Vec<BoundaryEdge> = count
        .values()
        .filter(|(c, _)| *c == 1)
        .map(|&(_, e)| {
            let side = (0..polygon.vertex_count()).find(|&n| {
                let (a, b) = (polygon.vertex(n), polygon.vertex(n + 1));
                e.iter()
                    .all(|&i| point_segment_distance(nodes[i], a, b) <= 1e-10 * scale)
            });
            BoundaryEdge {
                nodes: e,
                tag: side.map_or(EdgeTag::Artificial, EdgeTag::RobinWall),
            }
        })
        .collect();
    boundary.sort_unstable_by_key(|e| (e.tag, e.nodes));
    let corners: Vec<(usize, usize)> = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, x)| {
            polygon
                .vertices()
                .iter()
                .position(|v| v.dist(*x) <= 1e-12 * scale)
                .map(|v| (i, v))
        })
        .collect();
    let mesh = TriangleMesh {
        nodes,
        triangles,
        boundary,
        corners,
    };
    mesh.validate(Some(polygon))?;
    let min_angle = mesh.min_angle_deg();
    if min_angle < MIN_ANGLE_DEG {
        return Err(Error::MeshQualityFailure {
            min_angle_deg: min_angle,
        });
    }
    Ok(mesh)
}
