use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mec_bench::{dp_candidates, gains, scenario};
use mec_core::{
    dp_cpu_schedule, exhaustive_optimal, joint_allocate, optimal_transmit_power, per_resource_allocate, water_fill,
    CpuModel, LinkBudget, SubcarrierGroup,
};

fn phy(c: &mut Criterion) {
    let g = gains(4, 1);
    c.bench_function("water_fill_4", |b| b.iter(|| water_fill(black_box(&g), 0.5)));

    let link = LinkBudget {
        bandwidth_hz: 18_750.0,
        data_bits: 1000.0,
        deadline_s: 0.1,
        max_power_w: 1.0,
        circuit_power_w: 0.05,
    };
    let group = SubcarrierGroup::new(vec![0, 1, 2, 3]).unwrap();
    c.bench_function("optimal_transmit_power_4", |b| {
        b.iter(|| optimal_transmit_power(group.clone(), black_box(&g), &link))
    });
}

fn dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("dp_cpu_schedule");
    for k in [12, 14, 16] {
        let candidates = dp_candidates(k, k as u64);
        group.bench_with_input(BenchmarkId::from_parameter(k), &candidates, |b, cs| {
            b.iter(|| dp_cpu_schedule(black_box(cs)))
        });
    }
    group.finish();
}

fn policies(c: &mut Criterion) {
    let mut group = c.benchmark_group("policies");
    for m in [4, 8] {
        let s = scenario(m, 4, 3);
        group.bench_with_input(BenchmarkId::new("joint", m), &s, |b, s| b.iter(|| joint_allocate(black_box(s))));
        group.bench_with_input(BenchmarkId::new("per_resource", m), &s, |b, s| {
            b.iter(|| per_resource_allocate(black_box(s)))
        });
    }
    let s = scenario(4, 4, 3);
    group.sample_size(10);
    group.bench_function("opt_constrained_4x4", |b| b.iter(|| exhaustive_optimal(black_box(&s), CpuModel::Shared)));
    group.finish();
}

criterion_group!(benches, phy, dp, policies);
criterion_main!(benches);
