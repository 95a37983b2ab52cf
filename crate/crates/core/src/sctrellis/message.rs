//! State-pair likelihood blocks.

use crate::process::EdgeKernel;

/// `block[u][s, s']` is proportional to the probability of the observations
/// in a span, the hypothesis `u` for the span's synthetic bit and exit state
/// `s'`, given entry state `s`. The true value is `block * 2^log_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMessage {
    m: usize,
    block: Vec<f64>,
    log_scale: i64,
    impossible: bool,
}

impl StateMessage {
    /// Builds a message from raw blocks `[u][s][s']` and renormalizes.
    pub fn from_blocks(m: usize, block: Vec<f64>) -> Self {
        assert_eq!(block.len(), 2 * m * m, "block must hold 2 m^2 entries");
        let mut msg = Self {
            m,
            block,
            log_scale: 0,
            impossible: false,
        };
        msg.renormalize();
        msg
    }

    pub fn num_states(&self) -> usize {
        self.m
    }

    /// The normalized `m x m` block for hypothesis `u`.
    pub fn block(&self, u: u8) -> &[f64] {
        let mm = self.m * self.m;
        &self.block[u as usize * mm..(u as usize + 1) * mm]
    }

    pub fn log_scale(&self) -> i64 {
        self.log_scale
    }

    pub fn is_impossible(&self) -> bool {
        self.impossible
    }

    /// Unnormalized value of entry `[u][s, s']` (may underflow).
    pub fn value(&self, u: u8, s: usize, s2: usize) -> f64 {
        self.block(u)[s * self.m + s2] * pow2(self.log_scale)
    }

    /// `P(U = 0 | ...)` from an initial state law, `None` when both
    /// hypotheses have zero mass.
    pub fn posterior(&self, init: &[f64]) -> Option<f64> {
        let (p0, p1) = top_masses(self.m, &self.block, init);
        let s = p0 + p1;
        (s > 0.0).then(|| p0 / s)
    }

    fn renormalize(&mut self) {
        let e = normalize(&mut self.block);
        match e {
            Some(e) => self.log_scale += e as i64,
            None => self.impossible = true,
        }
    }
}

/// Span-1 message: `block[x][s, s'] = P(s -> s', x, y_t)`.
pub fn leaf_message(k: &EdgeKernel, y: usize) -> StateMessage {
    let mut block = k.emission_matrix(0, y).to_vec();
    block.extend_from_slice(k.emission_matrix(1, y));
    StateMessage::from_blocks(k.num_states(), block)
}

/// Message of `u ^ v` over the concatenated span, `left` carrying `u ^ v`
/// hypotheses and `right` carrying `v`.
pub fn combine_minus(left: &StateMessage, right: &StateMessage) -> StateMessage {
    assert_eq!(left.m, right.m, "state counts differ");
    let m = left.m;
    let mut out = StateMessage {
        m,
        block: vec![0.0; 2 * m * m],
        log_scale: left.log_scale + right.log_scale,
        impossible: false,
    };
    minus_into(m, &left.block, &right.block, &mut out.block);
    out.renormalize();
    out
}

/// Message of `v` given the decided `u ^ v = u_decided`.
pub fn combine_plus(left: &StateMessage, right: &StateMessage, u_decided: u8) -> StateMessage {
    assert_eq!(left.m, right.m, "state counts differ");
    let m = left.m;
    let mut out = StateMessage {
        m,
        block: vec![0.0; 2 * m * m],
        log_scale: left.log_scale + right.log_scale,
        impossible: false,
    };
    plus_into(m, &left.block, &right.block, u_decided, &mut out.block);
    out.renormalize();
    out
}

/// `2^e` for any integer `e` (saturating to 0 / inf).
pub(crate) fn pow2(e: i64) -> f64 {
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        2f64.powf(e as f64)
    }
}

/// Scales `v` so its max lies in `[1/2, 1)`; returns the exponent removed,
/// or `None` if `v` is all zero.
pub(crate) fn normalize(v: &mut [f64]) -> Option<i32> {
    let mut max = v.iter().fold(0.0f64, |a, &b| a.max(b));
    if max <= 0.0 || !max.is_finite() {
        return None;
    }
    let mut shift = 0;
    if max < f64::MIN_POSITIVE {
        // subnormal: lift into the normal range first
        let f = pow2(600);
        v.iter_mut().for_each(|x| *x *= f);
        max *= f;
        shift = -600;
    }
    let e = ((max.to_bits() >> 52) & 0x7ff) as i32 - 1022;
    if e != 0 {
        let f = pow2(-e as i64);
        v.iter_mut().for_each(|x| *x *= f);
    }
    Some(e + shift)
}

#[inline]
fn matmul_acc(m: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    if m == 1 {
        out[0] += a[0] * b[0];
        return;
    }
    for s0 in 0..m {
        let row = &a[s0 * m..(s0 + 1) * m];
        let dst = &mut out[s0 * m..(s0 + 1) * m];
        for (s1, &w) in row.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (d, &r) in dst.iter_mut().zip(&b[s1 * m..(s1 + 1) * m]) {
                *d += w * r;
            }
        }
    }
}

/// `out[t] = sum_v left[t ^ v] * right[v]` (matrix products).
pub(crate) fn minus_into(m: usize, left: &[f64], right: &[f64], out: &mut [f64]) {
    let mm = m * m;
    out.iter_mut().for_each(|x| *x = 0.0);
    let (o0, o1) = out.split_at_mut(mm);
    let (l0, l1) = left.split_at(mm);
    let (r0, r1) = right.split_at(mm);
    matmul_acc(m, l0, r0, o0);
    matmul_acc(m, l1, r1, o0);
    matmul_acc(m, l1, r0, o1);
    matmul_acc(m, l0, r1, o1);
}

/// `out[v] = left[u ^ v] * right[v]`.
pub(crate) fn plus_into(m: usize, left: &[f64], right: &[f64], u: u8, out: &mut [f64]) {
    let mm = m * m;
    out.iter_mut().for_each(|x| *x = 0.0);
    let (o0, o1) = out.split_at_mut(mm);
    let (l0, l1) = left.split_at(mm);
    let (r0, r1) = right.split_at(mm);
    if u == 0 {
        matmul_acc(m, l0, r0, o0);
        matmul_acc(m, l1, r1, o1);
    } else {
        matmul_acc(m, l1, r0, o0);
        matmul_acc(m, l0, r1, o1);
    }
}

/// `(sum pi(s) M[0][s, s'], sum pi(s) M[1][s, s'])`.
pub(crate) fn top_masses(m: usize, block: &[f64], init: &[f64]) -> (f64, f64) {
    let mm = m * m;
    let mass = |b: &[f64]| -> f64 {
        init.iter()
            .zip(b.chunks_exact(m))
            .map(|(&p, row)| p * row.iter().sum::<f64>())
            .sum()
    };
    (mass(&block[..mm]), mass(&block[mm..2 * mm]))
}
