//! Streaming enumeration of block laws one observation sequence at a time.
//!
//! For a fixed `y_1^L` the table `p(x_1^L, y_1^L)` over all `2^L` inputs is
//! built by a breadth-first forward recursion over input prefixes. Bit
//! vectors are indexed most-significant-first: variable 1 is the top bit.

use crate::process::EdgeKernel;
use crate::transform::polar_encode;

/// Source of per-observation-slice tables for blocks of length `len`.
#[derive(Debug, Clone)]
pub(crate) struct SliceSource<'a> {
    k: &'a EdgeKernel,
    len: usize,
    init: Vec<f64>,
    s1_mask: Option<usize>,
}

/// Reusable buffers for [`SliceSource::fill`].
#[derive(Debug, Default)]
pub(crate) struct SliceScratch {
    cur: Vec<f64>,
    next: Vec<f64>,
    y: Vec<usize>,
}

impl<'a> SliceSource<'a> {
    /// `init` is the law of `S_0`; `s1_mask` keeps only paths with `S_1 = s`
    /// (joint mass, not renormalized).
    pub fn new(k: &'a EdgeKernel, len: usize, init: Vec<f64>, s1_mask: Option<usize>) -> Self {
        Self {
            k,
            len,
            init,
            s1_mask,
        }
    }

    pub fn num_slices(&self) -> usize {
        self.k.num_obs().pow(self.len as u32)
    }

    /// Digits of `y_idx` in base `q`, first symbol most significant.
    pub fn decode_y(&self, y_idx: usize, out: &mut Vec<usize>) {
        let q = self.k.num_obs();
        out.clear();
        out.resize(self.len, 0);
        let mut r = y_idx;
        for t in (0..self.len).rev() {
            out[t] = r % q;
            r /= q;
        }
    }

    /// Fills `out[x] = p(x, y)` for the slice `y_idx`.
    pub fn fill(&self, y_idx: usize, sc: &mut SliceScratch, out: &mut [f64]) {
        let m = self.k.num_states();
        let states = self.fill_states(y_idx, sc);
        for (o, row) in out.iter_mut().zip(states.chunks_exact(m)) {
            *o = row.iter().sum();
        }
    }

    /// Returns `p(x, y, S_L = s)` laid out as `[x * m + s]`.
    pub fn fill_states<'s>(&self, y_idx: usize, sc: &'s mut SliceScratch) -> &'s [f64] {
        self.fill_states_from(&self.init, y_idx, sc)
    }

    pub fn fill_states_from<'s>(
        &self,
        init: &[f64],
        y_idx: usize,
        sc: &'s mut SliceScratch,
    ) -> &'s [f64] {
        let m = self.k.num_states();
        let mut y = std::mem::take(&mut sc.y);
        self.decode_y(y_idx, &mut y);
        sc.cur.clear();
        sc.cur.extend_from_slice(init);
        for (t, &yt) in y.iter().enumerate() {
            let width = sc.cur.len() / m;
            sc.next.clear();
            sc.next.resize(2 * width * m, 0.0);
            for x in 0..2u8 {
                let e = self.k.emission_matrix(x, yt);
                for a in 0..width {
                    let src = &sc.cur[a * m..(a + 1) * m];
                    let dst_base = ((a << 1) | x as usize) * m;
                    let dst = &mut sc.next[dst_base..dst_base + m];
                    for (s, &w) in src.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let row = &e[s * m..(s + 1) * m];
                        for (d, &p) in dst.iter_mut().zip(row) {
                            *d += w * p;
                        }
                    }
                }
            }
            if t == 0 {
                if let Some(s1) = self.s1_mask {
                    for (j, v) in sc.next.iter_mut().enumerate() {
                        if j % m != s1 {
                            *v = 0.0;
                        }
                    }
                }
            }
            std::mem::swap(&mut sc.cur, &mut sc.next);
        }
        sc.y = y;
        &sc.cur
    }
}

/// Partition of the observation alphabet into classes of symbols that act
/// identically up to flipping the emitted bit: `y ~ r` iff for some
/// `b in {0, 1}` the matrices `E[x, y]` and `E[x ^ b, r]` agree exactly for
/// both `x`.
///
/// Replacing `y` by `r` at any position maps the block law onto itself with
/// the corresponding input bits flipped. Every quantity computed from a
/// slice here is invariant under such translations, so one representative
/// slice per class sequence suffices, weighted by the class sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ObsClasses {
    pub rep: Vec<usize>,
    pub size: Vec<usize>,
}

pub(crate) fn observation_classes(k: &EdgeKernel) -> ObsClasses {
    let q = k.num_obs();
    let same = |y: usize, r: usize, b: u8| {
        (0..2u8).all(|x| k.emission_matrix(x, y) == k.emission_matrix(x ^ b, r))
    };
    let mut rep: Vec<usize> = (0..q).collect();
    for y in 0..q {
        if let Some(r) = (0..y).find(|&r| rep[r] == r && (same(y, r, 0) || same(y, r, 1))) {
            rep[y] = r;
        }
    }
    let size = (0..q)
        .map(|y| rep.iter().filter(|&&r| r == rep[y]).count())
        .collect();
    ObsClasses { rep, size }
}

impl SliceSource<'_> {
    /// Observation slices to visit with their multiplicities.
    pub fn weighted_slices(&self, reduce: bool) -> Vec<(usize, f64)> {
        let q = self.k.num_obs();
        if !reduce {
            return (0..self.num_slices()).map(|y| (y, 1.0)).collect();
        }
        let classes = observation_classes(self.k);
        let reps: Vec<usize> = (0..q).filter(|&y| classes.rep[y] == y).collect();
        let count = reps.len().pow(self.len as u32);
        (0..count)
            .map(|c| {
                let (mut r, mut y_idx, mut weight) = (c, 0usize, 1.0f64);
                let mut digits = vec![0usize; self.len];
                for d in digits.iter_mut().rev() {
                    *d = reps[r % reps.len()];
                    r /= reps.len();
                }
                for &d in &digits {
                    y_idx = y_idx * q + d;
                    weight *= classes.size[d] as f64;
                }
                (y_idx, weight)
            })
            .collect()
    }
}

/// Bits of `idx` as a length-`len` vector, most significant first.
pub(crate) fn index_bits(idx: usize, len: usize) -> Vec<u8> {
    (0..len)
        .map(|j| ((idx >> (len - 1 - j)) & 1) as u8)
        .collect()
}

pub(crate) fn bits_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Index map of a GF(2)-linear map on `len`-bit vectors, built from the
/// images of unit vectors.
pub(crate) fn linear_perm(len: usize, f: impl Fn(&[u8]) -> Vec<u8>) -> Vec<u32> {
    let basis: Vec<usize> = (0..len)
        .map(|b| bits_index(&f(&index_bits(1 << b, len))))
        .collect();
    let size = 1usize << len;
    let mut perm = vec![0u32; size];
    for x in 1..size {
        let low = x & x.wrapping_neg();
        perm[x] = perm[x ^ low] ^ basis[low.trailing_zeros() as usize] as u32;
    }
    perm
}

/// Index map of the polar transform on `len`-bit blocks.
pub(crate) fn transform_perm(len: usize) -> Vec<u32> {
    linear_perm(len, |x| polar_encode(x).expect("power-of-two block"))
}

/// Index map `x_1^{2N} -> (T(second half), T(first half))` when `swap`,
/// else `(T(first half), T(second half))`.
pub(crate) fn halves_perm(half: usize, swap: bool) -> Vec<u32> {
    linear_perm(2 * half, |x| {
        let a = polar_encode(&x[..half]).expect("power-of-two block");
        let b = polar_encode(&x[half..]).expect("power-of-two block");
        if swap {
            [b, a].concat()
        } else {
            [a, b].concat()
        }
    })
}

/// All prefix marginals of a table over `len`-bit vectors. Level `k` holds
/// the `2^k` masses of the length-`k` prefixes.
#[derive(Debug, Clone)]
pub(crate) struct Levels {
    len: usize,
    data: Vec<f64>,
}

impl Levels {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            data: vec![0.0; (2usize << len) - 1],
        }
    }

    /// Scatters `table` through `perm` into the top level and folds down.
    pub fn load(&mut self, table: &[f64], perm: &[u32]) {
        let top = (1usize << self.len) - 1;
        {
            let dst = &mut self.data[top..];
            for (&v, &p) in table.iter().zip(perm) {
                dst[p as usize] = v;
            }
        }
        self.fold();
    }

    #[cfg(test)]
    pub fn load_identity(&mut self, table: &[f64]) {
        let top = (1usize << self.len) - 1;
        self.data[top..].copy_from_slice(table);
        self.fold();
    }

    fn fold(&mut self) {
        for k in (0..self.len).rev() {
            let (lo, hi) = self.data.split_at_mut((1usize << (k + 1)) - 1);
            let dst = &mut lo[(1usize << k) - 1..];
            let src = &hi[..1usize << (k + 1)];
            for (d, pair) in dst.iter_mut().zip(src.chunks_exact(2)) {
                *d = pair[0] + pair[1];
            }
        }
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.data[(1usize << k) - 1..(2usize << k) - 1]
    }

    pub fn total(&self) -> f64 {
        self.data[0]
    }
}
