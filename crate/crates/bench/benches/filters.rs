use criterion::{criterion_group, criterion_main, Criterion};
use dmot_bench::desk_snapshot;
use dmot_core::filters::{lmb_predict, lmb_update, mdglmb_predict, mdglmb_update};
use dmot_core::sim::ospa;
use std::hint::black_box;

fn filters(c: &mut Criterion) {
    let snap = desk_snapshot(20);
    let s = &snap.scenario;
    let k = snap.step;
    let (md, lmb) = (&snap.mdglmb[0], &snap.lmb[0]);
    let (sensor, z) = (&s.sensors[0], &snap.next_scans[0]);

    c.bench_function("mdglmb_predict", |b| b.iter(|| mdglmb_predict(black_box(md), &s.motion, &s.birth, k, &s.filter).unwrap()));
    let pred = mdglmb_predict(md, &s.motion, &s.birth, k, &s.filter).unwrap();
    c.bench_function("mdglmb_update", |b| b.iter(|| mdglmb_update(black_box(&pred), z, sensor, k, &s.filter)));

    c.bench_function("lmb_predict", |b| b.iter(|| lmb_predict(black_box(lmb), &s.motion, &s.birth, k).unwrap()));
    let pred = lmb_predict(lmb, &s.motion, &s.birth, k).unwrap();
    c.bench_function("lmb_update", |b| b.iter(|| lmb_update(black_box(&pred), z, sensor, k, &s.filter)));

    let x: Vec<[f64; 2]> = (0..8).map(|i| [i as f64 * 300.0, 100.0 * (i as f64).sin()]).collect();
    let y: Vec<[f64; 2]> = (0..6).map(|i| [i as f64 * 310.0 + 40.0, 90.0]).collect();
    c.bench_function("ospa 8x6", |b| b.iter(|| ospa(black_box(&x), black_box(&y), 600.0, 2.0)));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = filters
}
criterion_main!(benches);
