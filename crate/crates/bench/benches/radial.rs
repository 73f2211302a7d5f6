use criterion::{criterion_group, criterion_main};

criterion_group!(benches, spd_radial_bench::radial);
criterion_main!(benches);
