use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use tabmoves::lattice::{circuits_general, kernel_basis, DEFAULT_CIRCUIT_SUBSET_LIMIT, DEFAULT_NORM_CAP};
use tabmoves::*;

fn design(r: usize, c: usize) -> IntMatrix {
    IntMatrix::from(&two_way_design(Shape::new(r, c).unwrap()))
}

fn lattice(c: &mut Criterion) {
    let a44 = design(4, 4);
    c.bench_function("kernel/4x4", |b| b.iter(|| kernel_basis(black_box(&a44)).unwrap().len()));
    let a34 = design(3, 4);
    c.bench_function("graver/3x4", |b| b.iter(|| graver_basis(black_box(&a34), DEFAULT_NORM_CAP).unwrap().len()));
    let a33 = design(3, 3);
    c.bench_function("circuits_general/3x3", |b| {
        b.iter(|| circuits_general(black_box(&a33), DEFAULT_CIRCUIT_SUBSET_LIMIT).unwrap().len())
    });
    let partial = LiftSpec::new(a33.clone(), vec![0, 4, 8]).unwrap();
    c.bench_function("universal/3x3 diagonal bounded", |b| {
        b.iter(|| universal_markov_basis(black_box(&partial), &UniversalOptions::default()).unwrap().moves.len())
    });
}

criterion_group!(benches, lattice);
criterion_main!(benches);
