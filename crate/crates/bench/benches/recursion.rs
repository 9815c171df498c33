use criterion::{black_box, criterion_group, criterion_main, Criterion};
use matmodel_core::{CorrelatorEngine, FreeEnergySeries, ICoordinateFrame, Partition, WickOracle};

fn recursion(c: &mut Criterion) {
    c.bench_function("thin <3^4,4>_4 cold", |b| {
        let lambda = Partition::new([3, 3, 3, 3, 4]).unwrap();
        b.iter(|| CorrelatorEngine::new().thin(black_box(&lambda), 4))
    });
    c.bench_function("assemble F to degree 8", |b| {
        b.iter(|| FreeEnergySeries::assemble(&CorrelatorEngine::new(), black_box(8)))
    });
}

fn oracle(c: &mut Criterion) {
    let oracle = WickOracle::new(14);
    let lambda = Partition::new([3, 3, 4, 4]).unwrap();
    c.bench_function("wick <3^2,4^2>", |b| b.iter(|| oracle.oracle_correlator(black_box(&lambda)).unwrap()));
}

fn icoords(c: &mut Criterion) {
    c.bench_function("I-frame order 8", |b| b.iter(|| ICoordinateFrame::build(black_box(8))));
}

criterion_group!(benches, recursion, oracle, icoords);
criterion_main!(benches);
