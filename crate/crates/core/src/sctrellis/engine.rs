//! Successive cancellation over a state trellis.
//!
//! Level `d` holds `N >> d` messages over consecutive spans of length
//! `2^d`. The transform of a length-`L` span splits into the transform of
//! the pairwise XORs `z[2k] ^ z[2k+1]` (first half of the indices) followed
//! by the transform of `z[2k+1]` (second half), so each level is built by
//! combining adjacent spans of the level below.

use super::message::{minus_into, normalize, plus_into, top_masses};
use crate::process::{stationary_distribution, EdgeKernel};
use crate::{Error, Result};

/// Reusable SC workspace for one kernel and block length.
#[derive(Debug, Clone)]
pub struct ScEngine {
    m: usize,
    n: usize,
    init: Vec<f64>,
    leaves: Vec<Vec<f64>>,
    /// `layers[d]` holds `n >> d` messages of `2 m^2` entries.
    layers: Vec<Vec<f64>>,
    /// Per-level bit scratch for partial re-encodes.
    bits: Vec<Vec<u8>>,
}

impl ScEngine {
    pub fn new(k: &EdgeKernel, n: usize) -> Result<Self> {
        let pi = stationary_distribution(k)?.pi;
        Self::with_initial(k, n, pi)
    }

    /// Engine whose top contraction uses `init` as the law of `S_0`.
    pub fn with_initial(k: &EdgeKernel, n: usize, init: Vec<f64>) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let m = k.num_states();
        let w = 2 * m * m;
        let leaves = (0..k.num_obs())
            .map(|y| {
                let mut b = k.emission_matrix(0, y).to_vec();
                b.extend_from_slice(k.emission_matrix(1, y));
                b
            })
            .collect();
        let depth = n.trailing_zeros() as usize;
        let layers = (0..=depth).map(|d| vec![0.0; (n >> d) * w]).collect();
        let bits = (0..=depth).map(|d| vec![0u8; n >> d]).collect();
        Ok(Self {
            m,
            n,
            init,
            leaves,
            layers,
            bits,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One full sweep over `y`. `decide(i, p0)` receives the 0-based index
    /// and `P(U_i = 0 | u_1^{i-1}, y)` (`None` when the past is impossible)
    /// and returns the bit to commit. Returns the committed `u`'s preimage
    /// `x`.
    pub fn run<F>(&mut self, y: &[usize], mut decide: F) -> Result<Vec<u8>>
    where
        F: FnMut(usize, Option<f64>) -> u8,
    {
        self.run_inspect(y, |i, leaf| decide(i, leaf.p0()))
    }

    /// As [`run`](Self::run), exposing the full top-level message at each
    /// index.
    pub fn run_inspect<F>(&mut self, y: &[usize], mut decide: F) -> Result<Vec<u8>>
    where
        F: FnMut(usize, &Leaf<'_>) -> u8,
    {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} observations for N = {}",
                y.len(),
                self.n
            )));
        }
        let w = 2 * self.m * self.m;
        let q = self.leaves.len();
        if let Some(&bad) = y.iter().find(|&&s| s >= q) {
            return Err(Error::IndexOutOfRange { index: bad, n: q });
        }
        for (dst, &yt) in self.layers[0].chunks_exact_mut(w).zip(y) {
            dst.copy_from_slice(&self.leaves[yt]);
        }
        let mut x = vec![0u8; self.n];
        descend(
            self.m,
            &self.init,
            &mut self.layers,
            &mut self.bits,
            0,
            0,
            &mut decide,
            &mut x,
        );
        Ok(x)
    }

    /// Posteriors `P(U_i = 0 | u_1^{i-1}, y)` along a full `u`.
    pub fn posteriors_along(&mut self, y: &[usize], u: &[u8]) -> Result<Vec<Option<f64>>> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{} decisions for N = {}",
                u.len(),
                self.n
            )));
        }
        let mut out = vec![None; self.n];
        self.run(y, |i, p| {
            out[i] = p;
            u[i]
        })?;
        Ok(out)
    }
}

/// Top-level message for one synthetic index: `block[u][s_0, s_N]` given
/// the committed past, up to scale.
#[derive(Debug, Clone, Copy)]
pub struct Leaf<'a> {
    m: usize,
    block: &'a [f64],
    init: &'a [f64],
}

impl Leaf<'_> {
    /// `P(U_i = 0 | past, y)`, `None` if the past is impossible.
    pub fn p0(&self) -> Option<f64> {
        let (p0, p1) = top_masses(self.m, self.block, self.init);
        let s = p0 + p1;
        (s > 0.0).then(|| p0 / s)
    }

    /// Posterior law of the entry state `S_0` given the past and `y`
    /// (marginalizing `U_i`).
    pub fn entry_state_law(&self) -> Option<Vec<f64>> {
        self.state_law(&[0, 1])
    }

    /// As [`entry_state_law`](Self::entry_state_law), additionally
    /// conditioned on `U_i = u`.
    pub fn entry_state_law_given(&self, u: u8) -> Option<Vec<f64>> {
        self.state_law(&[u & 1])
    }

    fn state_law(&self, hyps: &[u8]) -> Option<Vec<f64>> {
        let (m, mm) = (self.m, self.m * self.m);
        let law: Vec<f64> = (0..m)
            .map(|s| {
                let r: f64 = hyps
                    .iter()
                    .map(|&u| {
                        self.block[u as usize * mm + s * m..][..m]
                            .iter()
                            .sum::<f64>()
                    })
                    .sum();
                self.init[s] * r
            })
            .collect();
        let tot: f64 = law.iter().sum();
        (tot > 0.0).then(|| law.into_iter().map(|p| p / tot).collect())
    }
}

/// Level `d` currently holds the messages of a span whose first synthetic
/// index is `base`; decodes all of them and writes the span's preimage bits
/// into `x`.
#[allow(clippy::too_many_arguments)]
fn descend<F>(
    m: usize,
    init: &[f64],
    layers: &mut [Vec<f64>],
    bits: &mut [Vec<u8>],
    d: usize,
    base: usize,
    decide: &mut F,
    x: &mut [u8],
) where
    F: FnMut(usize, &Leaf<'_>) -> u8,
{
    let w = 2 * m * m;
    let len = x.len();
    if len == 1 {
        let leaf = Leaf {
            m,
            block: &layers[d][..w],
            init,
        };
        x[0] = decide(base, &leaf) & 1;
        return;
    }
    let half = len / 2;
    let (lo, hi) = layers.split_at_mut(d + 1);
    let (cur, next) = (&lo[d][..len * w], &mut hi[0][..half * w]);
    for (k, out) in next.chunks_exact_mut(w).enumerate() {
        minus_into(
            m,
            &cur[2 * k * w..(2 * k + 1) * w],
            &cur[(2 * k + 1) * w..(2 * k + 2) * w],
            out,
        );
        let _ = normalize(out);
    }
    let (xa, xb) = x.split_at_mut(half);
    descend(m, init, layers, bits, d + 1, base, decide, xa);
    let (lo, hi) = layers.split_at_mut(d + 1);
    let (cur, next) = (&lo[d][..len * w], &mut hi[0][..half * w]);
    for (k, out) in next.chunks_exact_mut(w).enumerate() {
        plus_into(
            m,
            &cur[2 * k * w..(2 * k + 1) * w],
            &cur[(2 * k + 1) * w..(2 * k + 2) * w],
            xa[k],
            out,
        );
        let _ = normalize(out);
    }
    descend(m, init, layers, bits, d + 1, base + half, decide, xb);
    let tmp = &mut bits[d][..len];
    tmp.copy_from_slice(x);
    for k in 0..half {
        let (a, b) = (tmp[k], tmp[half + k]);
        x[2 * k] = a ^ b;
        x[2 * k + 1] = b;
    }
}

/// `P(U_i = 0 | u_1^{i-1}, y)` with `i = prefix.len() + 1`, computed by a
/// sweep that commits `prefix` and then zeros.
pub fn sc_posteriors(engine: &mut ScEngine, y: &[usize], prefix: &[u8]) -> Result<f64> {
    let i = prefix.len();
    if i >= engine.n() {
        return Err(Error::IndexOutOfRange {
            index: i + 1,
            n: engine.n(),
        });
    }
    let mut out = None;
    engine.run(y, |j, p| {
        if j == i {
            out = p;
        }
        prefix.get(j).copied().unwrap_or(0)
    })?;
    out.ok_or(Error::ImpossibleEvent(i + 1))
}
