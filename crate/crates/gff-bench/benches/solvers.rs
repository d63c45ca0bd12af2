use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use gff_core::green::{greens_column, greens_matrix, harmonic_extension};
use gff_core::lattice::{build_box_lattice, build_box_lattice_capped, FieldFunction, Validation};

fn bench_greens_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("greens_matrix");
    for n in [2i64, 4, 8] {
        let g = build_box_lattice(2, n, 1.0).unwrap();
        group.bench_with_input(BenchmarkId::new("box2d", 2 * n + 1), &g, |b, g| {
            b.iter(|| black_box(greens_matrix(g).unwrap()))
        });
    }
    group.finish();
}

fn bench_greens_column_cg(c: &mut Criterion) {
    let mut group = c.benchmark_group("greens_column_cg");
    group.sample_size(10);
    for n in [16i64, 64] {
        let g =
            build_box_lattice_capped(2, n, 1.0, usize::MAX, Validation::SkipDefiniteness).unwrap();
        let origin = gff_core::lattice::box_vertex_id(2, n, &[0, 0]);
        group.bench_with_input(BenchmarkId::new("box2d", 2 * n + 1), &g, |b, g| {
            b.iter(|| black_box(greens_column(g, origin).unwrap()))
        });
    }
    group.finish();
}

fn bench_harmonic_extension(c: &mut Criterion) {
    let g = build_box_lattice(2, 8, 1.0).unwrap();
    let mut bv = FieldFunction::zeros(g.n_vertices());
    for &b in g.boundary() {
        let p = g.positions().unwrap().vertex(b);
        bv.values[b] = p[0] + 0.3 * p[1];
    }
    c.bench_function("harmonic_extension_17x17", |bch| {
        bch.iter(|| black_box(harmonic_extension(&g, &bv).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_greens_matrix,
    bench_greens_column_cg,
    bench_harmonic_extension
);
criterion_main!(benches);
