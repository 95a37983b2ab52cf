use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polarlab::oracle::{exact_profile_with, OracleOptions};
use polarlab::par::Exec;
use polarlab::process::{make_gilbert_elliott, parse_preset, EdgeKernel};
use polarlab::sctrellis::genie_profile_mc_with;
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn genie(c: &mut Criterion) {
    let k = parse_preset("hmm2").unwrap();
    let mut g = c.benchmark_group("genie_mc_hmm2_n256_s512");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| black_box(genie_profile_mc_with(&k, 256, 512, 1, exec).unwrap()))
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let k = parse_preset("ge").unwrap();
    let mut g = c.benchmark_group("exact_profile_ge_n8");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = OracleOptions {
            exec,
            ..Default::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| black_box(exact_profile_with(&k, 8, None, &opts).unwrap()))
        });
    }
    g.finish();
}

/// Product of `r` independent two-state chains, `2^r` states.
fn product_kernel(r: usize) -> EdgeKernel {
    let base = make_gilbert_elliott(0.02, 0.25, 0.05, 0.2).unwrap();
    let m = base.num_states();
    let mut k = base.clone();
    for _ in 1..r {
        let km = k.num_states();
        let mut edges = Vec::new();
        for a in k.edges() {
            for s in 0..m {
                for t in 0..m {
                    let p: f64 = (0..base.num_obs())
                        .map(|y| (0..2).map(|x| base.prob(s, t, x, y)).sum::<f64>())
                        .sum();
                    if p > 0.0 {
                        edges.push(polarlab::process::Edge {
                            from: a.from * m + s,
                            to: a.to * m + t,
                            p: a.p * p,
                            ..a
                        });
                    }
                }
            }
        }
        let labels: Vec<String> = (0..km * m).map(|i| i.to_string()).collect();
        k = EdgeKernel::new("product", labels, k.obs_labels().to_vec(), &edges, false).unwrap();
    }
    k
}

fn state_scaling(c: &mut Criterion) {
    let mut g = c.benchmark_group("genie_mc_state_scaling_n128_s64");
    g.sample_size(10);
    for r in 1..=4 {
        let k = product_kernel(r);
        g.bench_with_input(BenchmarkId::from_parameter(k.num_states()), &k, |b, k| {
            b.iter(|| black_box(genie_profile_mc_with(k, 128, 64, 1, Exec::Sequential).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, genie, oracle, state_scaling);
criterion_main!(benches);
