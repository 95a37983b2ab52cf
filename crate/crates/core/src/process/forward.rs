use serde::Serialize;

use super::{stationary_distribution, EdgeKernel, Sampler};
use crate::info::pair_entropy;
use crate::par::{map_chunks, pairwise_sum_vecs, Exec};
use crate::process::sample_rng;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    Exact,
    MonteCarlo,
}

/// Estimate of `(1/n) H(X_1^n | Y_1^n)` in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyRateEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_used: usize,
    pub method: RateMethod,
}

/// `(log2 p(x, y), log2 p(y))` under the stationary law.
pub fn forward_prob(k: &EdgeKernel, x: &[u8], y: &[usize]) -> Result<(f64, f64)> {
    let pi = stationary_distribution(k)?.pi;
    Ok(forward_prob_with_initial(k, &pi, x, y))
}

/// Forward recursion from an explicit initial state law. Impossible
/// sequences give `-inf`.
pub fn forward_prob_with_initial(
    k: &EdgeKernel,
    init: &[f64],
    x: &[u8],
    y: &[usize],
) -> (f64, f64) {
    assert_eq!(x.len(), y.len(), "x and y must have equal length");
    let m = k.num_states();
    let mut joint = init.to_vec();
    let mut obs = init.to_vec();
    let mut log_joint = 0.0f64;
    let mut log_obs = 0.0f64;
    let mut next = vec![0.0; m];
    for (&xt, &yt) in x.iter().zip(y) {
        advance(&joint, k.emission_matrix(xt, yt), None, &mut next, m);
        std::mem::swap(&mut joint, &mut next);
        advance(
            &obs,
            k.emission_matrix(0, yt),
            Some(k.emission_matrix(1, yt)),
            &mut next,
            m,
        );
        std::mem::swap(&mut obs, &mut next);
        log_joint += renormalize(&mut joint);
        log_obs += renormalize(&mut obs);
    }
    (log_joint, log_obs)
}

fn advance(alpha: &[f64], a: &[f64], b: Option<&[f64]>, out: &mut [f64], m: usize) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for s in 0..m {
        let w = alpha[s];
        if w == 0.0 {
            continue;
        }
        for s2 in 0..m {
            let mut p = a[s * m + s2];
            if let Some(b) = b {
                p += b[s * m + s2];
            }
            out[s2] += w * p;
        }
    }
}

fn renormalize(v: &mut [f64]) -> f64 {
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return f64::NEG_INFINITY;
    }
    v.iter_mut().for_each(|p| *p /= total);
    total.log2()
}

fn single_state_rate(k: &EdgeKernel) -> f64 {
    (0..k.num_obs())
        .map(|y| pair_entropy(k.prob(0, 0, 0, y), k.prob(0, 0, 1, y)))
        .sum()
}

/// Estimates `(1/n) H(X_1^n | Y_1^n)`. Single-state kernels are evaluated
/// in closed form; otherwise the estimator averages
/// `-(1/n) log2 p(x | y)` over `samples` stationary paths.
pub fn entropy_rate_estimate(
    k: &EdgeKernel,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<EntropyRateEstimate> {
    entropy_rate_estimate_with(k, n, samples, seed, Exec::default())
}

pub fn entropy_rate_estimate_with(
    k: &EdgeKernel,
    n: usize,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<EntropyRateEstimate> {
    if k.num_states() == 1 {
        return Ok(EntropyRateEstimate {
            value: single_state_rate(k).clamp(0.0, 1.0),
            stderr: 0.0,
            n_used: n,
            method: RateMethod::Exact,
        });
    }
    let pi = stationary_distribution(k)?.pi;
    let sampler = Sampler::with_initial(k, &pi);
    let samples = samples.max(1);
    let parts = map_chunks(exec, samples, 64, |range| {
        let mut acc = vec![0.0; 2];
        for i in range {
            let path = sampler.sample(n, &mut sample_rng(seed, i as u64));
            let (lxy, ly) = forward_prob_with_initial(k, &pi, &path.x, &path.y);
            let v = -(lxy - ly) / n as f64;
            acc[0] += v;
            acc[1] += v * v;
        }
        acc
    });
    let sums = pairwise_sum_vecs(parts);
    let s = samples as f64;
    let mean = sums[0] / s;
    let var = if samples > 1 {
        ((sums[1] - s * mean * mean) / (s - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(EntropyRateEstimate {
        value: mean.clamp(0.0, 1.0),
        stderr: (var / s).sqrt(),
        n_used: n,
        method: RateMethod::MonteCarlo,
    })
}
