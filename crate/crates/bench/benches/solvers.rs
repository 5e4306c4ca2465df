use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use splitplan::oracle::{oracle_parallel, GridSpec};
use splitplan::parallel::{joint_resources, lemma1_allocate, EqualDelayProblem};
use splitplan::{solve, Policy, SolverSettings};
use splitplan_bench::{default_network, reference_profile, toy_network, toy_profile};

fn policies(c: &mut Criterion) {
    let profile = reference_profile();
    let settings = SolverSettings::default();
    let mut group = c.benchmark_group("policy");
    group.sample_size(10);
    for policy in Policy::ALL {
        for k in [4usize, 8, 16] {
            let net = default_network(&profile, k, 0);
            group.bench_with_input(BenchmarkId::new(policy.as_str(), k), &net, |b, net| {
                b.iter(|| solve(policy, black_box(net), &settings).expect("default instances solve"))
            });
        }
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let profile = reference_profile();
    let settings = SolverSettings::default();
    let mut group = c.benchmark_group("kernel");
    for k in [4usize, 16, 32] {
        let arrivals: Vec<f64> = (0..k).map(|i| 0.1 + 0.05 * i as f64).collect();
        let residuals: Vec<f64> = (0..k).map(|i| 1e9 * (1.0 + (i % 3) as f64)).collect();
        let problem = EqualDelayProblem::new(&arrivals, &residuals, 300e9).expect("valid problem");
        group.bench_with_input(BenchmarkId::new("lemma1", k), &problem, |b, p| {
            b.iter(|| lemma1_allocate(black_box(p)).expect("solvable"))
        });
    }
    for k in [4usize, 16] {
        let net = default_network(&profile, k, 0);
        let cuts = vec![net.devices[0].profile().min_payload_cut(); k];
        group.bench_with_input(BenchmarkId::new("joint_resources", k), &net, |b, net| {
            b.iter(|| joint_resources(black_box(net), &cuts, &settings).expect("feasible"))
        });
    }
    group.finish();

    let toy = toy_profile();
    let net = toy_network(&toy, 0);
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("parallel_k2_l4", |b| {
        b.iter(|| oracle_parallel(black_box(&net), &GridSpec::default()).expect("small instance"))
    });
    group.finish();
}

criterion_group!(benches, policies, kernels);
criterion_main!(benches);
