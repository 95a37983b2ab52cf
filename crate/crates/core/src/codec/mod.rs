//! Polar source coding with decoder side information.
//!
//! The encoder sends `u_F`, the transformed block restricted to the frozen
//! (high-entropy) set. The decoder runs SC over the state trellis, copying
//! frozen bits and taking the likelier value elsewhere.

mod design;
mod format;

pub use design::{design_code, DesignRule, FrozenSet};
pub use format::{CompressedBlock, MAGIC};

use serde::Serialize;

use crate::info::wilson_interval;
use crate::par::{map_chunks, pairwise_sum_vecs, Exec};
use crate::process::{sample_rng, EdgeKernel, Sampler};
use crate::sctrellis::ScEngine;
use crate::transform::polar_encode;
use crate::{Error, Result};

/// `u_F` in index order.
pub fn compress(x: &[u8], frozen: &FrozenSet) -> Result<Vec<u8>> {
    if x.len() != frozen.n() {
        return Err(Error::DimensionMismatch(format!(
            "block of {} bits for N = {}",
            x.len(),
            frozen.n()
        )));
    }
    let u = polar_encode(x)?;
    Ok(frozen.indices().iter().map(|&i| u[i - 1]).collect())
}

/// Reconstructs `x` from `u_F` and the side information `y`.
pub fn decompress(k: &EdgeKernel, bits: &[u8], y: &[usize], frozen: &FrozenSet) -> Result<Vec<u8>> {
    decompress_with(&mut ScEngine::new(k, frozen.n())?, bits, y, frozen)
}

/// As [`decompress`], reusing an engine built for the same kernel and `N`.
pub fn decompress_with(
    engine: &mut ScEngine,
    bits: &[u8],
    y: &[usize],
    frozen: &FrozenSet,
) -> Result<Vec<u8>> {
    if bits.len() != frozen.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} bits for |F| = {}",
            bits.len(),
            frozen.len()
        )));
    }
    if engine.n() != frozen.n() {
        return Err(Error::DimensionMismatch(format!(
            "engine N = {}, code N = {}",
            engine.n(),
            frozen.n()
        )));
    }
    let mask = frozen.mask();
    let mut next = 0;
    let mut failed = None;
    let x = engine.run(y, |i, p0| {
        let Some(p0) = p0 else {
            failed.get_or_insert(i + 1);
            return 0;
        };
        if mask[i] {
            let b = bits[next];
            next += 1;
            b & 1
        } else {
            u8::from(p0 < 0.5)
        }
    })?;
    match failed {
        Some(i) => Err(Error::DecodeFailure(format!(
            "conditioning event impossible at index {i}"
        ))),
        None => Ok(x),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodecReport {
    pub n: usize,
    pub frozen: usize,
    pub rate: f64,
    pub trials: usize,
    pub block_errors: usize,
    pub bit_errors: usize,
    /// Blocks the decoder rejected as impossible (counted as block errors
    /// with every bit wrong).
    pub decode_failures: usize,
    pub block_error_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub z_sum_bound: f64,
}

impl CodecReport {
    pub fn wilson_half_width(&self) -> f64 {
        (self.wilson_hi - self.wilson_lo) / 2.0
    }
}

/// Normal quantile for the reported 95% Wilson interval.
pub const WILSON_Z: f64 = 1.959964;

pub fn evaluate(
    k: &EdgeKernel,
    frozen: &FrozenSet,
    trials: usize,
    seed: u64,
) -> Result<CodecReport> {
    evaluate_with(k, frozen, trials, seed, Exec::default())
}

pub fn evaluate_with(
    k: &EdgeKernel,
    frozen: &FrozenSet,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<CodecReport> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let n = frozen.n();
    let proto = ScEngine::new(k, n)?;
    let sampler = Sampler::new(k)?;
    let parts = map_chunks(exec, trials, 8, |range| {
        let mut engine = proto.clone();
        // [block errors, bit errors, failures]
        let mut acc = vec![0.0; 3];
        for t in range {
            let path = sampler.sample(n, &mut sample_rng(seed, t as u64));
            let sent = compress(&path.x, frozen).expect("block length matches");
            match decompress_with(&mut engine, &sent, &path.y, frozen) {
                Ok(xh) => {
                    let wrong = xh.iter().zip(&path.x).filter(|(a, b)| a != b).count();
                    acc[0] += f64::from(wrong > 0);
                    acc[1] += wrong as f64;
                }
                Err(_) => {
                    acc[0] += 1.0;
                    acc[1] += n as f64;
                    acc[2] += 1.0;
                }
            }
        }
        acc
    });
    let acc = pairwise_sum_vecs(parts);
    let block_errors = acc[0] as usize;
    let (wilson_lo, wilson_hi) = wilson_interval(block_errors, trials, WILSON_Z);
    Ok(CodecReport {
        n,
        frozen: frozen.len(),
        rate: frozen.rate(),
        trials,
        block_errors,
        bit_errors: acc[1] as usize,
        decode_failures: acc[2] as usize,
        block_error_rate: block_errors as f64 / trials as f64,
        wilson_lo,
        wilson_hi,
        z_sum_bound: frozen.z_sum_bound,
    })
}
