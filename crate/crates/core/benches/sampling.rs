//! Data-parallel vs sequential pointer sampling.
//!
//! Both paths produce bit-identical reports; this suite measures what the
//! rayon fan-out buys at various sample counts and shard layouts. Run with
//! `cargo bench -p tsvf-core`, or `--no-default-features` to time the build
//! without the parallel backend compiled in at all.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tsvf_core::hilbert::DEFAULT_EPS;
use tsvf_core::measurement::PauliAxis;
use tsvf_core::scenarios::builtin_hardy_spins;
use tsvf_core::tsvf::product_observable;
use tsvf_core::weak::{sample_pointer, sample_pointer_seq, WeakMeasurementConfig};
use tsvf_core::{Observable, TwoStateVector};

fn setup() -> (TwoStateVector, Observable) {
    let scenario = builtin_hardy_spins();
    let tsv = scenario.two_state_vector(DEFAULT_EPS).unwrap();
    let layout = scenario.layout().clone();
    let zz = product_observable(
        &Observable::pauli(PauliAxis::Z, 0, &layout).unwrap(),
        &Observable::pauli(PauliAxis::Z, 1, &layout).unwrap(),
        DEFAULT_EPS,
    )
    .unwrap();
    (tsv, zz)
}

fn bench_sampling(c: &mut Criterion) {
    let (tsv, zz) = setup();
    let shards = std::thread::available_parallelism().map_or(4, usize::from);
    let mut group = c.benchmark_group("pointer_sampling");
    for &n in &[10_000u64, 100_000, 1_000_000] {
        let config = WeakMeasurementConfig::new(0.05, 1.0, n, 42).with_shards(shards);
        group.bench_with_input(BenchmarkId::new("parallel", n), &config, |b, config| {
            b.iter(|| sample_pointer(&tsv, &zz, config, DEFAULT_EPS).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &config, |b, config| {
            b.iter(|| sample_pointer_seq(&tsv, &zz, config, DEFAULT_EPS).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sampling);
criterion_main!(benches);
