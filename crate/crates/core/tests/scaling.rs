mod common;

use std::time::Instant;

use common::kernel_from_weights;
use polarlab::process::sample_path;
use polarlab::sctrellis::ScEngine;
use polarlab::transform::polar_encode;

/// Wall-clock per SC pass grows like m^3 in the state count; timing-based,
/// so run it explicitly with `--ignored` on a quiet machine.
#[test]
#[ignore]
fn sc_cost_grows_cubically_in_states() {
    let n = 256;
    let mut pts = Vec::new();
    for m in [4usize, 8, 16, 32] {
        let w: Vec<f64> = (0..m * m * 4)
            .map(|i| 0.1 + ((i * 7919) % 97) as f64 / 97.0)
            .collect();
        let k = kernel_from_weights(m, 2, &w);
        let mut engine = ScEngine::new(&k, n).unwrap();
        let path = sample_path(&k, n, 1).unwrap();
        let u = polar_encode(&path.x).unwrap();
        let reps = (4096 / (m * m)).max(2);
        let t = Instant::now();
        for _ in 0..reps {
            engine.run(&path.y, |i, _| u[i]).unwrap();
        }
        pts.push((
            (m as f64).ln(),
            (t.elapsed().as_secs_f64() / reps as f64).ln(),
        ));
    }
    let nf = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    println!("log-log slope {slope:.2}");
    assert!((2.3..=3.7).contains(&slope), "slope {slope}");
}
