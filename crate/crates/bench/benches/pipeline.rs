use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use robin_spectra::eigen::factorize;
use robin_spectra::{
    assemble, build_mesh, default_spec, lowest_eigenpairs, merged_spectrum, ArtificialBc, ConvexPolygon, SpectrumKind,
};
use robin_spectra_bench::triangle_mesh;

fn model_spectra(c: &mut Criterion) {
    let poly = ConvexPolygon::regular(8, 1.0).unwrap();
    c.bench_function("merged_spectrum_octagon_30", |b| {
        b.iter(|| merged_spectrum(black_box(&poly), SpectrumKind::Dirichlet, 30))
    });
}

fn meshing(c: &mut Criterion) {
    let tri = ConvexPolygon::equilateral(1.0);
    let mut group = c.benchmark_group("build_mesh");
    group.sample_size(10);
    for alpha in [6.0, 10.0] {
        let spec = default_spec(&tri, alpha, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &spec, |b, spec| {
            b.iter(|| build_mesh(&tri, spec).unwrap())
        });
    }
    group.finish();
}

fn linear_algebra(c: &mut Criterion) {
    let mesh = triangle_mesh(10.0);
    c.bench_function("assemble_triangle_a10", |b| {
        b.iter(|| assemble(black_box(&mesh), 10.0, ArtificialBc::Dirichlet).unwrap())
    });
    let form = assemble(&mesh, 10.0, ArtificialBc::Dirichlet).unwrap();
    let shifted = form.operator().add_scaled(&form.mass, 101.0).unwrap();
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("factorize_triangle_a10", |b| b.iter(|| factorize(black_box(&shifted)).unwrap()));
    group.bench_function("lowest3_triangle_a10", |b| {
        b.iter(|| lowest_eigenpairs(black_box(&form), 3, None, 1e-9).unwrap())
    });
    group.finish();
}

criterion_group!(benches, model_spectra, meshing, linear_algebra);
criterion_main!(benches);
