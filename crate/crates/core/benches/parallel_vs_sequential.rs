use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use qsskit::classify::{classify, enumerate_structures_with, PipelineOptions};
use qsskit::codebook;
use qsskit::par::Exec;
use qsskit::qssverify::entropy_profile_with;
use qsskit::qstate::PureState;
use qsskit::uniformity::purity_table;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn random_state(n: usize) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let amps = (0..1usize << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    PureState::normalized(n, amps).expect("nonzero vector")
}

fn states(c: &mut Criterion) {
    let steane = codebook::scheme("steane").expect("steane").state();
    let wide = random_state(10);

    let mut group = c.benchmark_group("purity_table");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, "10 qubits"), &wide, |b, s| {
            b.iter(|| purity_table(black_box(s), exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("entropy_profile");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, "steane"), &steane, |b, s| {
            b.iter(|| entropy_profile_with(black_box(s), exec).unwrap())
        });
    }
    group.finish();
}

fn classification(c: &mut Criterion) {
    let mut group = c.benchmark_group("classification");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::new(name, "enumerate n=6"), |b| {
            b.iter(|| enumerate_structures_with(black_box(6), false, exec).unwrap())
        });
        let options = PipelineOptions { exec, ..Default::default() };
        group.bench_function(BenchmarkId::new(name, "classify n=6"), |b| {
            b.iter(|| classify(black_box(6), false, options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, states, classification);
criterion_main!(benches);
