//! Fixtures shared by the benchmarks.

use robin_spectra::{build_mesh, default_spec, ConvexPolygon, TriangleMesh};

/// Coarse exterior mesh of the unit equilateral triangle at `alpha`.
pub fn triangle_mesh(alpha: f64) -> TriangleMesh {
    let tri = ConvexPolygon::equilateral(1.0);
    let mut spec = default_spec(&tri, alpha, 1).expect("alpha large enough for the bracket");
    spec.boundary_cell *= 2.0;
    spec.interior_cell *= 2.0;
    build_mesh(&tri, &spec).expect("default spec meshes")
}
