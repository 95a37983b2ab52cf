//! The period-4 counterexample: exact conditional profiles, the
//! non-polarizing window `(5N/8, 6N/8]`, and the state-guessing pipeline.

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::info::{h2, wilson_interval};
use crate::oracle::{exact_profile, exact_state_entropy};
use crate::par::{map_chunks, pairwise_sum_vecs, Exec};
use crate::process::{sample_rng, EdgeKernel, Sampler};
use crate::sctrellis::{genie_profile_mc, stratified_profile_mc, ScEngine};
use crate::transform::{deinterleave, polar_encode};
use crate::{Error, Result};

/// First five transformed bits of one length-8 sub-block.
pub type Prefix5 = [u8; 5];

/// Guesses `S_1` from the `U_1^5` of several sub-blocks.
pub fn guess_initial_state(blocks: &[Prefix5]) -> Result<usize> {
    if blocks.is_empty() {
        return Err(Error::Domain("need at least one block".into()));
    }
    // 0-based positions: U2 -> 1, U3 -> 2, U4 -> 3, U5 -> 4
    Ok(if blocks.iter().all(|b| b[3] == 0) {
        0
    } else if blocks.iter().all(|b| b[1] == b[3]) {
        2
    } else if blocks.iter().all(|b| b[4] == b[2]) {
        1
    } else {
        3
    })
}

/// Recovers the `U_1^5` of every length-8 sub-block from a prefix of the
/// length-`N` transform of at least `5N/8` bits.
pub fn extract_subblock_prefixes(prefix: &[u8], n: usize) -> Result<Vec<Prefix5>> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::Domain(format!(
            "N = {n} must be a power of two >= 8"
        )));
    }
    if prefix.len() < 5 * n / 8 {
        return Err(Error::Domain(format!(
            "prefix of {} bits, need {}",
            prefix.len(),
            5 * n / 8
        )));
    }
    let mut out = Vec::with_capacity(n / 8);
    split(&prefix[..5 * n / 8], n, &mut out)?;
    Ok(out)
}

fn split(t: &[u8], n: usize, out: &mut Vec<Prefix5>) -> Result<()> {
    if n == 8 {
        out.push(t[..5].try_into().expect("five bits"));
        return Ok(());
    }
    let (a, b) = deinterleave(t)?;
    split(&a, n / 2, out)?;
    split(&b, n / 2, out)
}

/// `h2(pe) + pe log2 3`.
pub fn fano_check(pe: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::Domain(format!("pe = {pe} outside [0, 1]")));
    }
    Ok(h2(pe) + pe * 3f64.log2())
}

/// Exact conditional window values for one `(N, s1)`.
#[derive(Debug, Clone, Serialize)]
pub struct WindowRow {
    pub n: usize,
    pub s1: usize,
    pub expected: f64,
    /// `(i, H_i)` for `i` in the window.
    pub values: Vec<(usize, f64)>,
    pub max_violation: f64,
}

/// Monte-Carlo statistics at one block length.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicMc {
    pub n: usize,
    pub samples: usize,
    /// `max |H_i - 1/2|` over the window, state-stratified estimator.
    pub max_window_deviation: f64,
    /// Largest standard error over the window for that estimator.
    pub window_stderr: f64,
    /// The same maximum from the plain genie estimator, whose noise
    /// (about `0.5 / sqrt(samples)`) dominates once the true deviation is
    /// tiny.
    pub plain_max_window_deviation: f64,
    /// Misdecode rate of [`guess_initial_state`] on `N/8` sub-blocks.
    pub misdecode_rate: f64,
    /// Upper 3-sigma Wilson bound on the misdecode rate.
    pub misdecode_upper: f64,
    /// Estimate of `H(S_1 | U_1^{5N/8})` and its standard error.
    pub state_entropy: f64,
    pub state_entropy_stderr: f64,
    pub fano_bound: f64,
    pub fano_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicReport {
    pub window_rows: Vec<WindowRow>,
    /// Worst exact violation; zero up to rounding when the window behaves.
    pub max_exact_violation: f64,
    /// `H(U_6 | U_1^5) - [1/2 + H(S_1|U_1^5) - H(S_1|U_1^6)]` at `N = 8`.
    pub chain_identity_residual: f64,
    pub mc: Vec<PeriodicMc>,
    /// Window deviation strictly shrinks with `N`.
    pub deviation_decreasing: bool,
}

fn window(n: usize) -> std::ops::RangeInclusive<usize> {
    5 * n / 8 + 1..=6 * n / 8
}

fn require_bb00(k: &EdgeKernel) -> Result<()> {
    if k.num_states() != 4 || k.num_obs() != 1 || k.period() != 4 {
        return Err(Error::Config(format!(
            "{} is not the period-4 process",
            k.name()
        )));
    }
    Ok(())
}

/// Exact window profile per initial state at each block length.
pub fn exact_window_rows(k: &EdgeKernel, sizes: &[usize]) -> Result<Vec<WindowRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        for s1 in 0..4 {
            let p = exact_profile(k, n, Some(s1))?;
            let expected = if s1 % 2 == 1 { 0.0 } else { 1.0 };
            let values: Vec<(usize, f64)> = window(n).map(|i| (i, p.h[i - 1])).collect();
            let max_violation = values
                .iter()
                .map(|(_, h)| (h - expected).abs())
                .fold(0.0, f64::max);
            rows.push(WindowRow {
                n,
                s1,
                expected,
                values,
                max_violation,
            });
        }
    }
    Ok(rows)
}

/// The state-guessing experiment at one block length.
pub fn state_guess_stats(
    k: &EdgeKernel,
    n: usize,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<(f64, f64, f64)> {
    let cut = 5 * n / 8;
    let proto = ScEngine::new(k, n)?;
    let sampler = Sampler::new(k)?;
    let parts = map_chunks(exec, samples, 64, |range| {
        let mut engine = proto.clone();
        // [misdecodes, sum H, sum H^2]
        let mut acc = vec![0.0; 3];
        for idx in range {
            let path = sampler.sample(n, &mut sample_rng(seed, idx as u64));
            let u = polar_encode(&path.x).expect("power-of-two block");
            let blocks = extract_subblock_prefixes(&u[..cut], n).expect("long enough prefix");
            let guess = guess_initial_state(&blocks).expect("non-empty");
            acc[0] += f64::from(guess != path.s[1]);
            let mut h = 0.0;
            engine
                .run_inspect(&path.y, |i, leaf| {
                    if i == cut {
                        // S_1 = S_0 + 1 deterministically, so the entropies agree
                        let law = leaf.entry_state_law().unwrap_or_default();
                        h = law
                            .iter()
                            .filter(|&&p| p > 0.0)
                            .map(|&p| -p * p.log2())
                            .sum();
                    }
                    u[i]
                })
                .expect("valid observations");
            acc[1] += h;
            acc[2] += h * h;
        }
        acc
    });
    let acc = pairwise_sum_vecs(parts);
    let s = samples as f64;
    let mean = acc[1] / s;
    let var = if samples > 1 {
        ((acc[2] / s - mean * mean) * s / (s - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((acc[0] / s, mean, (var / s).sqrt()))
}

/// Block lengths for the Monte-Carlo part.
pub const PERIODIC_MC_SIZES: [usize; 2] = [64, 256];

pub fn run_periodic(cfg: &ExperimentConfig) -> Result<PeriodicReport> {
    let k = cfg.kernel()?;
    require_bb00(&k)?;
    let window_rows = exact_window_rows(&k, &[8, 16])?;
    let max_exact_violation = window_rows
        .iter()
        .map(|r| r.max_violation)
        .fold(0.0, f64::max);

    let prof = exact_profile(&k, 8, None)?;
    let hs = exact_state_entropy(&k, 8)?;
    let chain_identity_residual = prof.h[5] - (0.5 + hs[5] - hs[6]);

    let mut mc = Vec::new();
    for (j, &n) in PERIODIC_MC_SIZES.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(j as u64 * 0x9e37_79b9);
        let dev = |p: &crate::oracle::Profile| {
            window(n)
                .map(|i| (p.h[i - 1] - 0.5).abs())
                .fold(0.0, f64::max)
        };
        let strat = stratified_profile_mc(&k, n, cfg.samples, seed)?;
        let plain = genie_profile_mc(&k, n, cfg.samples, seed)?;
        let window_stderr = window(n).map(|i| strat.h_stderr[i - 1]).fold(0.0, f64::max);
        let (pe, h, h_se) = state_guess_stats(&k, n, cfg.samples, seed ^ 0x51ab, Exec::default())?;
        let errors = (pe * cfg.samples as f64).round() as usize;
        let upper = wilson_interval(errors, cfg.samples, 3.0).1;
        let fano_bound = fano_check(upper)?;
        mc.push(PeriodicMc {
            n,
            samples: cfg.samples,
            max_window_deviation: dev(&strat),
            window_stderr,
            plain_max_window_deviation: dev(&plain),
            misdecode_rate: pe,
            misdecode_upper: upper,
            state_entropy: h,
            state_entropy_stderr: h_se,
            fano_bound,
            fano_holds: h <= fano_bound,
        });
    }
    let deviation_decreasing = mc
        .windows(2)
        .all(|w| w[1].max_window_deviation < w[0].max_window_deviation);
    Ok(PeriodicReport {
        window_rows,
        max_exact_violation,
        chain_identity_residual,
        mc,
        deviation_decreasing,
    })
}
