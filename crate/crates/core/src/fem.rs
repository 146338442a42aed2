//! P1 finite element forms of the Robin Laplacian on a triangle mesh.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mesh::{ArtificialBc, EdgeTag, TriangleMesh};
use crate::sparse::SymmetricSparseMatrix;

/// The discrete pieces of `h_alpha(u, u) = |grad u|^2 - alpha |u|^2_{walls}`:
/// stiffness `A`, wall mass `B` and domain mass `M`, all on the same unknowns.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    pub stiffness: SymmetricSparseMatrix,
    pub wall_mass: SymmetricSparseMatrix,
    pub mass: SymmetricSparseMatrix,
    pub alpha: f64,
    pub artificial_bc: ArtificialBc,
    /// Unknown index of each mesh node, `None` for eliminated nodes.
    pub unknown_of_node: Vec<Option<usize>>,
    pub node_of_unknown: Vec<usize>,
    /// Number of distinct wall sides seen in the mesh.
    pub side_count: usize,
}

/// `(1/(4 area)) (b_i b_j + c_i c_j)` for the three vertices of a triangle.
pub fn element_stiffness(p: [Vec2; 3]) -> [[f64; 3]; 3] {
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    k
}

pub fn element_mass(p: [Vec2; 3]) -> [[f64; 3]; 3] {
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

pub fn edge_mass(h: f64) -> [[f64; 2]; 2] {
    [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]]
}

/// Assembles the forms. With an artificial Dirichlet condition the nodes on
/// artificial edges are eliminated; with Neumann they stay free and carry
/// no boundary term. Unknowns are numbered in lexicographic node order.
pub fn assemble(mesh: &TriangleMesh, alpha: f64, bc: ArtificialBc) -> Result<DiscreteForm> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    mesh.validate(None)?;
    let n = mesh.node_count();
    let fixed = match bc {
        ArtificialBc::Dirichlet => mesh.nodes_with_tag(|t| t == EdgeTag::Artificial),
        ArtificialBc::Neumann => vec![false; n],
    };
    let mut order: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
        pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y)).then(a.cmp(&b))
    });
    let mut unknown_of_node = vec![None; n];
    for (k, &node) in order.iter().enumerate() {
        unknown_of_node[node] = Some(k);
    }
    let dim = order.len();
    if dim == 0 {
        return Err(Error::InvalidMesh("no free nodes left after constraints".into()));
    }

    let mut a_trip = Vec::with_capacity(9 * mesh.triangle_count());
    let mut m_trip = Vec::with_capacity(9 * mesh.triangle_count());
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.nodes[i]);
        let ke = element_stiffness(p);
        let me = element_mass(p);
        for i in 0..3 {
            let Some(ui) = unknown_of_node[t[i]] else { continue };
            for j in i..3 {
                let Some(uj) = unknown_of_node[t[j]] else { continue };
                a_trip.push((ui, uj, ke[i][j]));
                m_trip.push((ui, uj, me[i][j]));
            }
        }
    }
    let mut b_trip = Vec::new();
    let mut sides = std::collections::BTreeSet::new();
    for e in &mesh.boundary {
        if let EdgeTag::RobinWall(side) = e.tag {
            sides.insert(side);
            let h = mesh.nodes[e.nodes[0]].dist(mesh.nodes[e.nodes[1]]);
            let be = edge_mass(h);
            for i in 0..2 {
                let Some(ui) = unknown_of_node[e.nodes[i]] else { continue };
                for j in i..2 {
                    let Some(uj) = unknown_of_node[e.nodes[j]] else { continue };
                    b_trip.push((ui, uj, be[i][j]));
                }
            }
        }
    }
    Ok(DiscreteForm {
        stiffness: SymmetricSparseMatrix::from_triplets(dim, a_trip)?,
        wall_mass: SymmetricSparseMatrix::from_triplets(dim, b_trip)?,
        mass: SymmetricSparseMatrix::from_triplets(dim, m_trip)?,
        alpha,
        artificial_bc: bc,
        unknown_of_node,
        node_of_unknown: order,
        side_count: sides.len(),
    })
}

impl DiscreteForm {
    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// `A - alpha B`.
    pub fn operator(&self) -> SymmetricSparseMatrix {
        self.stiffness
            .add_scaled(&self.wall_mass, -self.alpha)
            .expect("forms share a dimension")
    }

    /// The same form at another Robin parameter.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    /// `u^T (A - alpha B) u`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.stiffness.quad_form(u) - self.alpha * self.wall_mass.quad_form(u)
    }

    /// Expands a vector of unknowns to all mesh nodes, zero on eliminated ones.
    pub fn to_nodes(&self, u: &[f64]) -> Vec<f64> {
        self.unknown_of_node
            .iter()
            .map(|k| k.map_or(0.0, |k| u[k]))
            .collect()
    }
}

/// `u^T (A - alpha B) u / u^T M u`.
pub fn rayleigh(form: &DiscreteForm, u: &[f64]) -> Result<f64> {
    if u.len() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            found: u.len(),
        });
    }
    let m = form.mass.quad_form(u);
    if !(m > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(form.energy(u) / m)
}
