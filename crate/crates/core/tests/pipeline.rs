use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robin_spectra::eigen::{lowest_eigenpairs_with, EigenOptions};
use robin_spectra::harness::{run_sweep, BcMode, SpecOverrides, SweepConfig};
use robin_spectra::{
    assemble, build_mesh, default_spec, rayleigh, ArtificialBc, ConvexPolygon, EdgeTag, TriangleMesh,
    TruncationSpec,
};

fn coarse_spec(poly: &ConvexPolygon, alpha: f64) -> TruncationSpec {
    let mut spec = default_spec(poly, alpha, 1).unwrap();
    spec.boundary_cell = 0.05;
    spec.interior_cell = 0.2;
    spec
}

fn coarse_triangle(alpha: f64) -> (ConvexPolygon, TriangleMesh) {
    let tri = ConvexPolygon::equilateral(1.0);
    let mesh = build_mesh(&tri, &coarse_spec(&tri, alpha)).unwrap();
    (tri, mesh)
}

#[test]
fn assembled_forms_respect_the_lower_bound() {
    let alpha = 6.0;
    let (_, mesh) = coarse_triangle(alpha);
    for bc in [ArtificialBc::Dirichlet, ArtificialBc::Neumann] {
        let form = assemble(&mesh, alpha, bc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u: Vec<f64> = (0..form.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = form.mass.quad_form(&u);
            assert!(form.energy(&u) >= -alpha * alpha * m - 1e-8);
            assert!(rayleigh(&form, &u).unwrap() >= -alpha * alpha - 1e-8 * alpha * alpha);
        }
        // smooth boundary-concentrated vector, which is where the bound is tight
        let u: Vec<f64> = form
            .node_of_unknown
            .iter()
            .map(|&n| (-alpha * mesh_distance(&mesh, n)).exp())
            .collect();
        assert!(rayleigh(&form, &u).unwrap() >= -alpha * alpha - 1e-8 * alpha * alpha);
    }
}

fn mesh_distance(mesh: &TriangleMesh, node: usize) -> f64 {
    let tri = ConvexPolygon::equilateral(1.0);
    tri.signed_distance(mesh.nodes[node]).max(0.0)
}

#[test]
fn neumann_form_keeps_constants_in_the_stiffness_kernel() {
    let (_, mesh) = coarse_triangle(6.0);
    let form = assemble(&mesh, 6.0, ArtificialBc::Neumann).unwrap();
    assert!(form.stiffness.row_sums().iter().all(|s| s.abs() < 1e-10));
    let walls = mesh.nodes_with_tag(|t| matches!(t, EdgeTag::RobinWall(_)));
    let rows = form.wall_mass.nonzero_rows();
    for (node, k) in form.unknown_of_node.iter().enumerate() {
        assert_eq!(rows[k.unwrap()], walls[node]);
    }
    let ones = vec![1.0; form.dim()];
    assert!((form.mass.quad_form(&ones) - mesh.area()).abs() < 1e-9 * mesh.area());
    assert!((form.wall_mass.quad_form(&ones) - 3.0).abs() < 1e-12);
}

#[test]
fn eigen_pairs_are_orthonormal_with_verified_residuals_and_start_invariant() {
    let alpha = 6.0;
    let (_, mesh) = coarse_triangle(alpha);
    let form = assemble(&mesh, alpha, ArtificialBc::Dirichlet).unwrap();
    let opts = EigenOptions {
        block_size: 3,
        ..EigenOptions::default()
    };
    let r = lowest_eigenpairs_with(&form, 4, &opts).unwrap();
    assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    let k = form.operator();
    for (i, x) in r.eigenvectors.iter().enumerate() {
        let kx = k.mul_vec(x);
        let mx = form.mass.mul_vec(x);
        let res: f64 = kx
            .iter()
            .zip(&mx)
            .map(|(a, b)| (a - r.eigenvalues[i] * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res <= 1e-9, "residual {res}");
        for (j, y) in r.eigenvectors.iter().enumerate() {
            let ip: f64 = mx.iter().zip(y).map(|(a, b)| a * b).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-8, "<x{i}, x{j}>_M = {ip}");
        }
    }
    // rotate a random start block by a random orthogonal matrix
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = form.dim();
    let start: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let q = nalgebra::DMatrix::<f64>::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let rotated: Vec<Vec<f64>> = (0..3)
        .map(|c| (0..n).map(|i| (0..3).map(|k| start[k][i] * q[(k, c)]).sum()).collect())
        .collect();
    let a = lowest_eigenpairs_with(&form, 4, &EigenOptions { start, ..opts.clone() }).unwrap();
    let b = lowest_eigenpairs_with(&form, 4, &EigenOptions { start: rotated, ..opts.clone() }).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-10, "{x} {y}");
    }
    // two valid shifts
    let c = lowest_eigenpairs_with(&form, 4, &EigenOptions { shift: Some(-200.0), ..opts }).unwrap();
    for (x, y) in r.eigenvalues.iter().zip(&c.eigenvalues) {
        assert!((x - y).abs() < 1e-9, "{x} {y}");
    }
}

#[test]
fn unit_square_cluster_sits_in_the_bracket() {
    let sq = ConvexPolygon::unit_square();
    let cfg = SweepConfig {
        levels: 1,
        bc_mode: BcMode::DirichletOnly,
        ..SweepConfig::new(sq, vec![10.0], 4)
    };
    let report = run_sweep(&cfg).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    let values: Vec<f64> = report.records.iter().map(|r| r.e_mid).collect();
    for &e in &values {
        assert!(e >= -100.0 && e <= -100.0 + pi2, "{values:?}");
    }
    // fourfold cluster: spread well below the gap to the next model level
    let spread = values[3] - values[0];
    assert!(spread < 0.5 * pi2, "{values:?}");
}

#[test]
fn enclosure_shrinks_with_the_truncation_radius() {
    let tri = ConvexPolygon::equilateral(1.0);
    let alpha = 4.0;
    let base = coarse_spec(&tri, alpha);
    let gap = |offset: f64| {
        let cfg = SweepConfig {
            levels: 1,
            overrides: SpecOverrides {
                offset: Some(offset),
                boundary_cell: Some(base.boundary_cell),
                interior_cell: Some(base.interior_cell),
                ..SpecOverrides::default()
            },
            ..SweepConfig::new(tri.clone(), vec![alpha], 1)
        };
        run_sweep(&cfg).unwrap().records[0].enclosure_width
    };
    let (near, far) = (gap(0.6), gap(1.2));
    assert!(near > 0.0);
    assert!(far <= near + 1e-9, "{near} {far}");
}

#[test]
fn sweeps_are_deterministic() {
    let tri = ConvexPolygon::equilateral(1.0);
    let cfg = SweepConfig {
        levels: 2,
        seed: 42,
        overrides: SpecOverrides {
            boundary_cell: Some(0.05),
            interior_cell: Some(0.2),
            ..SpecOverrides::default()
        },
        ..SweepConfig::new(tri, vec![4.0, 5.0], 1)
    };
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
    for r in &a.records {
        assert!(r.e_neu.unwrap() <= r.e_dir.unwrap() + 1e-9);
        assert!(r.remainder.is_finite() && r.eps_h.is_finite());
    }
}
