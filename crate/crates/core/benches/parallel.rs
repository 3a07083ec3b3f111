use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use selfsim::family::scan;
use selfsim::ifs::make_bernoulli;
use selfsim::scalar::parse_exact;
use selfsim::ulam::{build_ulam_with, make_partition};
use selfsim::{Execution, FamilySpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn ulam_build(c: &mut Criterion) {
    let model = make_bernoulli(0.8).unwrap();
    let mut group = c.benchmark_group("ulam_build");
    group.sample_size(10);
    for n in [500usize, 2000] {
        let partition = make_partition(&model.support(), n, None).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &partition, |b, p| {
                b.iter(|| build_ulam_with(black_box(&model), p, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn family_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("family_scan");
    group.sample_size(10);
    for exact in [false, true] {
        let spec = FamilySpec {
            t_range: (parse_exact("0.65").unwrap(), parse_exact("0.8").unwrap()),
            t_steps: 16,
            x_range: (0.1, 0.5),
            x_steps: 41,
            degree: 16,
            exact,
        };
        let label = if exact { "exact" } else { "float" };
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, label), &spec, |b, s| {
                b.iter(|| scan(black_box(s), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn batch_eval(c: &mut Criterion) {
    let model = make_bernoulli(0.8).unwrap();
    let v = selfsim::density::solve_vn(&model, 20).unwrap();
    let xs: Vec<f64> = (0..1 << 16).map(|i| -1.0 + 2.0 * i as f64 / 65536.0).collect();
    let chunks: Vec<&[f64]> = xs.chunks(4096).collect();
    let mut group = c.benchmark_group("evaluate_v20");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| exec.map_slice(&chunks, |chunk| v.evaluate(chunk)))
        });
    }
    group.finish();
}

criterion_group!(benches, ulam_build, family_scan, batch_eval);
criterion_main!(benches);
