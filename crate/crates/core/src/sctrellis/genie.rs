use super::engine::ScEngine;
use crate::oracle::{Profile, ProfileMethod};
use crate::par::{map_chunks, pairwise_sum_vecs, Exec};
use crate::process::{sample_rng, stationary_distribution, EdgeKernel, Sampler};
use crate::transform::polar_encode;
use crate::{Error, Result};

const CHUNK: usize = 64;

/// Genie-aided Monte-Carlo profile: SC runs along the true `u` of each
/// sampled block, accumulating `-log2 p(u_i | past)` and `2 sqrt(p0 p1)`.
pub fn genie_profile_mc(k: &EdgeKernel, n: usize, samples: usize, seed: u64) -> Result<Profile> {
    genie_profile_mc_with(k, n, samples, seed, Exec::default())
}

pub fn genie_profile_mc_with(
    k: &EdgeKernel,
    n: usize,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<Profile> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let proto = ScEngine::new(k, n)?;
    let sampler = Sampler::new(k)?;
    let parts = map_chunks(exec, samples, CHUNK, |range| {
        let mut engine = proto.clone();
        // [h, h^2, z, z^2] per index
        let mut acc = vec![0.0; 4 * n];
        for idx in range {
            let path = sampler.sample(n, &mut sample_rng(seed, idx as u64));
            let u = polar_encode(&path.x).expect("power-of-two block");
            engine
                .run(&path.y, |i, p0| {
                    let p0 = p0.unwrap_or(0.5);
                    let p_true = if u[i] == 0 { p0 } else { 1.0 - p0 };
                    let h = -p_true.max(f64::MIN_POSITIVE).log2();
                    let z = 2.0 * (p0 * (1.0 - p0)).max(0.0).sqrt();
                    acc[i] += h;
                    acc[n + i] += h * h;
                    acc[2 * n + i] += z;
                    acc[3 * n + i] += z * z;
                    u[i]
                })
                .expect("sampled observations are in range");
        }
        acc
    });
    let acc = pairwise_sum_vecs(parts);
    let s = samples as f64;
    let stats = |sum: &[f64], sq: &[f64]| -> (Vec<f64>, Vec<f64>) {
        sum.iter()
            .zip(sq)
            .map(|(&a, &b)| {
                let mean = a / s;
                let var = if samples > 1 {
                    ((b / s - mean * mean) * s / (s - 1.0)).max(0.0)
                } else {
                    0.0
                };
                (mean, (var / s).sqrt())
            })
            .unzip()
    };
    let (h, h_stderr) = stats(&acc[..n], &acc[n..2 * n]);
    let (z, z_stderr) = stats(&acc[2 * n..3 * n], &acc[3 * n..]);
    let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
    Ok(Profile {
        n,
        h: clamp(h),
        z: clamp(z),
        h_stderr,
        z_stderr,
        method: ProfileMethod::MonteCarlo,
        samples,
    })
}

fn entropy(law: &[f64]) -> f64 {
    law.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// State-stratified estimate of the same profile.
///
/// Uses `H(U_i | P) = H(U_i | P, S_0) + H(S_0 | P) - H(S_0 | P, U_i)` with
/// `P = (U_1^{i-1}, Y)`. Samples are allocated to entry states in
/// proportion to the stationary law; within a stratum the first term comes
/// from SC started in the known state and the other two from the entropy
/// of the entry-state posterior along the same path. Each term is
/// unbiased, and the variance collapses when the state is quickly
/// identified. `Z` is the plain genie estimate, post-stratified.
pub fn stratified_profile_mc(
    k: &EdgeKernel,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Profile> {
    stratified_profile_mc_with(k, n, samples, seed, Exec::default())
}

pub fn stratified_profile_mc_with(
    k: &EdgeKernel,
    n: usize,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<Profile> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let m = k.num_states();
    let pi = stationary_distribution(k)?.pi;
    // systematic allocation: sample j goes to the stratum containing (j + 1/2) / samples
    let mut cum = 0.0;
    let bounds: Vec<f64> = pi
        .iter()
        .map(|p| {
            cum += p;
            cum
        })
        .collect();
    let stratum_of = |j: usize| {
        let t = (j as f64 + 0.5) / samples as f64;
        bounds.iter().position(|&b| t < b).unwrap_or(m - 1)
    };
    let mut counts = vec![0usize; m];
    (0..samples).for_each(|j| counts[stratum_of(j)] += 1);

    let free = ScEngine::with_initial(k, n, pi.clone())?;
    let pinned: Vec<ScEngine> = (0..m)
        .map(|s| {
            let mut d = vec![0.0; m];
            d[s] = 1.0;
            ScEngine::with_initial(k, n, d)
        })
        .collect::<Result<_>>()?;
    let samplers: Vec<Sampler> = (0..m)
        .map(|s| {
            let mut d = vec![0.0; m];
            d[s] = 1.0;
            Sampler::with_initial(k, &d)
        })
        .collect();

    let parts = map_chunks(exec, samples, CHUNK, |range| {
        let (mut free, mut pinned) = (free.clone(), pinned.clone());
        // per stratum: [v, v^2, z, z^2] per index
        let mut acc = vec![0.0; m * 4 * n];
        let mut v = vec![0.0; n];
        for j in range {
            let s = stratum_of(j);
            let path = samplers[s].sample(n, &mut sample_rng(seed, j as u64));
            let u = polar_encode(&path.x).expect("power-of-two block");
            let a = &mut acc[s * 4 * n..(s + 1) * 4 * n];
            pinned[s]
                .run(&path.y, |i, p0| {
                    let p0 = p0.unwrap_or(0.5);
                    v[i] = crate::info::h2(p0);
                    u[i]
                })
                .expect("sampled observations are in range");
            free.run_inspect(&path.y, |i, leaf| {
                let before = leaf.entry_state_law().map_or(0.0, |l| entropy(&l));
                let after = leaf
                    .entry_state_law_given(u[i])
                    .map_or(0.0, |l| entropy(&l));
                let p0 = leaf.p0().unwrap_or(0.5);
                let z = 2.0 * (p0 * (1.0 - p0)).max(0.0).sqrt();
                let val = v[i] + before - after;
                a[i] += val;
                a[n + i] += val * val;
                a[2 * n + i] += z;
                a[3 * n + i] += z * z;
                u[i]
            })
            .expect("sampled observations are in range");
        }
        acc
    });
    let acc = pairwise_sum_vecs(parts);
    let mut h = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut h_var = vec![0.0; n];
    let mut z_var = vec![0.0; n];
    for s in 0..m {
        let c = counts[s];
        if c == 0 {
            continue;
        }
        let cf = c as f64;
        let a = &acc[s * 4 * n..(s + 1) * 4 * n];
        for i in 0..n {
            for (sum, sq, mean_out, var_out) in [
                (a[i], a[n + i], &mut h[i], &mut h_var[i]),
                (a[2 * n + i], a[3 * n + i], &mut z[i], &mut z_var[i]),
            ] {
                let mean = sum / cf;
                let var = if c > 1 {
                    ((sq / cf - mean * mean) * cf / (cf - 1.0)).max(0.0)
                } else {
                    0.0
                };
                *mean_out += pi[s] * mean;
                *var_out += pi[s] * pi[s] * var / cf;
            }
        }
    }
    let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
    let sqrt = |v: Vec<f64>| v.into_iter().map(f64::sqrt).collect();
    Ok(Profile {
        n,
        h: clamp(h),
        z: clamp(z),
        h_stderr: sqrt(h_var),
        z_stderr: sqrt(z_var),
        method: ProfileMethod::MonteCarlo,
        samples,
    })
}
