use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robin_spectra::variational::{
    projection_gap, random_profile, random_sector_field, random_strip_field, sector_trace_check, strip_energy_gap,
};
use robin_spectra::{bracket, merged_spectrum, ConvexPolygon, SpectrumKind, SymmetricSparseMatrix, Vec2};

fn polygon_strategy() -> impl Strategy<Value = ConvexPolygon> {
    (3usize..=8, any::<u64>(), 0.2..4.0f64, 0.2..4.0f64).prop_filter_map("degenerate", |(m, seed, sx, sy)| {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        a.sort_by(f64::total_cmp);
        let gap_ok = (0..m).all(|i| {
            let next = if i + 1 < m { a[i + 1] } else { a[0] + 2.0 * PI };
            next - a[i] > 0.05
        });
        if !gap_ok {
            return None;
        }
        ConvexPolygon::new(a.iter().map(|&t| Vec2::new(sx * t.cos(), sy * t.sin())).collect()).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neumann_below_dirichlet(p in polygon_strategy(), count in 1usize..40) {
        let d = merged_spectrum(&p, SpectrumKind::Dirichlet, count).values();
        let n = merged_spectrum(&p, SpectrumKind::Neumann, count).values();
        prop_assert!(d.windows(2).all(|w| w[0] <= w[1]));
        for (x, y) in n.iter().zip(&d) {
            prop_assert!(x <= y);
        }
        let b = bracket(&p, 50.0, count).unwrap();
        prop_assert!(b.lower <= b.upper);
    }

    #[test]
    fn spectra_are_invariant_under_rigid_motion(p in polygon_strategy(), angle in 0.0..6.3f64, dx in -5.0..5.0f64) {
        let q = p.transformed(angle, 1.0, Vec2::new(dx, -dx)).unwrap();
        let a = merged_spectrum(&p, SpectrumKind::Dirichlet, 12).values();
        let b = merged_spectrum(&q, SpectrumKind::Dirichlet, 12).values();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs());
        }
    }

    #[test]
    fn projection_inequality_holds(seed in any::<u64>(), alpha in 0.5..20.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = projection_gap(&random_profile(&mut rng, alpha).unwrap(), alpha).unwrap();
        prop_assert!(g.holds(1e-8), "{g:?}");
    }

    #[test]
    fn trace_inequality_holds(seed in any::<u64>(), theta in 0.1..6.2f64, eps in 0.05..20.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_sector_field(&mut rng, theta).unwrap();
        let t = sector_trace_check(&f, eps).unwrap();
        prop_assert!(t.holds(1e-12), "{t:?}");
    }

    #[test]
    fn strip_chain_holds(seed in any::<u64>(), alpha in 0.5..20.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = strip_energy_gap(&random_strip_field(&mut rng, alpha).unwrap(), alpha).unwrap();
        prop_assert!(e.transverse >= 0.0 && e.transverse <= e.robin_form + 1e-8, "{e:?}");
    }

    #[test]
    fn sparse_product_is_symmetric(entries in proptest::collection::vec((0usize..12, 0usize..12, -5.0..5.0f64), 1..60),
                                   x in proptest::collection::vec(-1.0..1.0f64, 12),
                                   y in proptest::collection::vec(-1.0..1.0f64, 12)) {
        let a = SymmetricSparseMatrix::from_triplets(12, entries).unwrap();
        let ax = a.mul_vec(&x);
        let ay = a.mul_vec(&y);
        let l: f64 = ax.iter().zip(&y).map(|(p, q)| p * q).sum();
        let r: f64 = ay.iter().zip(&x).map(|(p, q)| p * q).sum();
        prop_assert!((l - r).abs() < 1e-10);
    }
}
