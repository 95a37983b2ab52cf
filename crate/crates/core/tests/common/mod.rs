#![allow(dead_code)]

use polarlab::process::{Edge, EdgeKernel};
use proptest::prelude::*;

/// Random kernel with every transition possible (irreducible, aperiodic).
pub fn kernel_from_weights(m: usize, q: usize, w: &[f64]) -> EdgeKernel {
    let per_state = m * 2 * q;
    let mut edges = Vec::new();
    for s in 0..m {
        let row = &w[s * per_state..(s + 1) * per_state];
        let total: f64 = row.iter().sum();
        let mut j = 0;
        for to in 0..m {
            for x in 0..2u8 {
                for y in 0..q {
                    edges.push(Edge {
                        from: s,
                        to,
                        x,
                        y,
                        p: row[j] / total,
                    });
                    j += 1;
                }
            }
        }
    }
    let labels = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect();
    EdgeKernel::new("random", labels("s", m), labels("y", q), &edges, false)
        .expect("normalized by construction")
}

pub fn arb_kernel(max_m: usize, max_q: usize) -> impl Strategy<Value = EdgeKernel> {
    (1..=max_m, 1..=max_q).prop_flat_map(|(m, q)| {
        prop::collection::vec(0.05f64..1.0, m * m * 2 * q)
            .prop_map(move |w| kernel_from_weights(m, q, &w))
    })
}

pub const PRESETS: [&str; 5] = ["iid:0.5", "iid:0.11", "hmm2", "ge", "bb00"];
