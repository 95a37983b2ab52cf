//! Exact two-block analysis: all quantities relating the size-`N`
//! synthetic variables `U_i` (first block), `V_i` (second block) and the
//! size-`2N` children `T_{2i-1} = U_i + V_i`, `T_{2i} = V_i`.
//!
//! Shorthand: `Q_i = (U_1^{i-1}, Y_1^N)`, `R_i = (V_1^{i-1}, Y_{N+1}^{2N})`.

use serde::Serialize;

use super::profile::Profile;
use super::slices::{halves_perm, transform_perm, Levels, SliceScratch, SliceSource};
use super::{check_cap, planned_slices, slice_chunk, OracleOptions};
use crate::info::{h2, pair_bhattacharyya, pair_entropy};
use crate::par::{map_chunks, pairwise_sum_vecs};
use crate::process::{psi_k_bound, stationary_distribution, EdgeKernel};
use crate::Result;

const H_MINUS: usize = 0;
const Z_MINUS: usize = 1;
const H_PLUS: usize = 2;
const Z_PLUS: usize = 3;
const H_PAIR: usize = 4;
const H_U_QR: usize = 5;
const H_V_QR: usize = 6;
const H_U_FULL: usize = 7;
const H_V_FULL: usize = 8;
const H_SUR: usize = 9;
const L1: usize = 10;
const L2SQ: usize = 11;
const H2_AVG: usize = 12;
const ZHAT_MINUS: usize = 13;
const ZHAT_PLUS: usize = 14;
const FIELDS: usize = 15;

/// Exact two-block quantities, one entry per index `i = 1..=N` (0-based
/// vectors).
#[derive(Debug, Clone, Serialize)]
pub struct PairAnalysis {
    pub kernel: String,
    pub n: usize,
    /// `psi_k_bound(k, 0)`.
    pub psi0: f64,
    /// `H(U_i | Q_i)` and `Z(U_i | Q_i)`.
    pub half: Profile,
    /// `H(U_i + V_i | Q_i, R_i)`, i.e. `H^{b0}`.
    pub h_minus: Vec<f64>,
    pub z_minus: Vec<f64>,
    /// `H(V_i | Q_i, R_i, U_i + V_i)`, i.e. `H^{b1}`.
    pub h_plus: Vec<f64>,
    pub z_plus: Vec<f64>,
    /// `H(U_i, V_i | Q_i, R_i)` summed directly over the pair.
    pub h_pair: Vec<f64>,
    pub h_u_qr: Vec<f64>,
    pub h_v_qr: Vec<f64>,
    /// `H(U_i | Q_i, V_1^N, Y_{N+1}^{2N})`.
    pub h_u_full: Vec<f64>,
    /// `H(V_i | R_i, U_1^N, Y_1^N)`.
    pub h_v_full: Vec<f64>,
    /// `H(U~_i + V~_i | Q_i, R_i)` under the product surrogate.
    pub h_surrogate: Vec<f64>,
    /// `E|beta - alpha|`, `E(beta - alpha)^2` and `E h2(|beta - alpha|)`
    /// over `(Q_i, R_i)`.
    pub l1: Vec<f64>,
    pub l2sq: Vec<f64>,
    pub h2_avg: Vec<f64>,
    /// Bhattacharyya parameters of the children under the product law of
    /// two independent blocks.
    pub zhat_minus: Vec<f64>,
    pub zhat_plus: Vec<f64>,
    /// `max p(x, y) / [p(x', y') p(x'', y'')]` over the support.
    pub max_density_ratio: f64,
}

impl PairAnalysis {
    pub fn compute(k: &EdgeKernel, n: usize) -> Result<Self> {
        Self::compute_with(k, n, &OracleOptions::default())
    }

    pub fn compute_with(k: &EdgeKernel, n: usize, opts: &OracleOptions) -> Result<Self> {
        planned_slices(k, 2 * n, opts)?;
        let q = k.num_obs();
        let half_slices = q.pow(n as u32);
        check_cap((half_slices as u128) << (n + 2), opts.table_cap)?;
        let psi0 = psi_k_bound(k, 0)?;
        let pi = stationary_distribution(k)?.pi;

        let half_src = SliceSource::new(k, n, pi.clone(), None);
        let half_perm = transform_perm(n);
        let mut sc = SliceScratch::default();
        let mut half_x = vec![vec![0.0; 1 << n]; half_slices];
        let mut half_levels = Vec::with_capacity(half_slices);
        for (y1, tab) in half_x.iter_mut().enumerate() {
            half_src.fill(y1, &mut sc, tab);
            let mut lv = Levels::new(n);
            lv.load(tab, &half_perm);
            half_levels.push(lv);
        }
        let mut h_half = vec![0.0; n];
        let mut z_half = vec![0.0; n];
        for lv in &half_levels {
            for i in 1..=n {
                for pair in lv.level(i).chunks_exact(2) {
                    h_half[i - 1] += pair_entropy(pair[0], pair[1]);
                    z_half[i - 1] += pair_bhattacharyya(pair[0], pair[1]);
                }
            }
        }

        let uv_of = prefix_split_tables(n);
        let src = SliceSource::new(k, 2 * n, pi, None);
        let perm_t = transform_perm(2 * n);
        let perm_vu = halves_perm(n, true);
        let perm_uv = halves_perm(n, false);
        let list = src.weighted_slices(opts.use_symmetry);
        let mask = (1usize << n) - 1;

        let parts = map_chunks(opts.exec, list.len(), slice_chunk(list.len()), |range| {
            let mut acc = vec![0.0; FIELDS * n];
            let mut cur = vec![0.0; FIELDS * n];
            let mut ratio = 0.0f64;
            let mut sc = SliceScratch::default();
            let mut table = vec![0.0; 1 << (2 * n)];
            let mut t_lv = Levels::new(2 * n);
            let mut vu_lv = Levels::new(2 * n);
            let mut uv_lv = Levels::new(2 * n);
            for &(y_idx, w) in &list[range] {
                cur.iter_mut().for_each(|v| *v = 0.0);
                let (y1, y2) = (y_idx / half_slices, y_idx % half_slices);
                src.fill(y_idx, &mut sc, &mut table);
                let (hx1, hx2) = (&half_x[y1], &half_x[y2]);
                for (x, &p) in table.iter().enumerate() {
                    if p > 0.0 {
                        ratio = ratio.max(p / (hx1[x >> n] * hx2[x & mask]));
                    }
                }
                let (a_lv, b_lv) = (&half_levels[y1], &half_levels[y2]);
                t_lv.load(&table, &perm_t);
                let any_mass = t_lv.total() > 0.0;
                if any_mass {
                    vu_lv.load(&table, &perm_vu);
                    uv_lv.load(&table, &perm_uv);
                }
                for i in 1..=n {
                    let f = &mut cur[FIELDS * (i - 1)..FIELDS * i];
                    let (a_half, b_half) = (a_lv.level(i), b_lv.level(i));
                    // product law over all prefix pairs, including those
                    // outside the support of the true law
                    for &(u, v) in &uv_of[i - 1] {
                        let (a0, a1) = (a_half[2 * u as usize], a_half[2 * u as usize + 1]);
                        let (b0, b1) = (b_half[2 * v as usize], b_half[2 * v as usize + 1]);
                        f[ZHAT_MINUS] += 2.0 * ((a0 * b0 + a1 * b1) * (a0 * b1 + a1 * b0)).sqrt();
                        f[ZHAT_PLUS] += 4.0 * (a0 * a1 * b0 * b1).sqrt();
                    }
                    if !any_mass {
                        continue;
                    }
                    for pair in t_lv.level(2 * i - 1).chunks_exact(2) {
                        f[H_MINUS] += pair_entropy(pair[0], pair[1]);
                        f[Z_MINUS] += pair_bhattacharyya(pair[0], pair[1]);
                    }
                    for pair in t_lv.level(2 * i).chunks_exact(2) {
                        f[H_PLUS] += pair_entropy(pair[0], pair[1]);
                        f[Z_PLUS] += pair_bhattacharyya(pair[0], pair[1]);
                    }
                    for pair in vu_lv.level(n + i).chunks_exact(2) {
                        f[H_U_FULL] += pair_entropy(pair[0], pair[1]);
                    }
                    for pair in uv_lv.level(n + i).chunks_exact(2) {
                        f[H_V_FULL] += pair_entropy(pair[0], pair[1]);
                    }
                    let prev = t_lv.level(2 * i - 2);
                    let mid = t_lv.level(2 * i - 1);
                    let full = t_lv.level(2 * i);
                    for (a, &s) in prev.iter().enumerate() {
                        if s <= 0.0 {
                            continue;
                        }
                        // p[2 t_odd + t_even]; u = t_odd ^ t_even, v = t_even
                        let p = &full[4 * a..4 * a + 4];
                        f[H_PAIR] += p
                            .iter()
                            .filter(|&&t| t > 0.0)
                            .map(|&t| t * (s / t).log2())
                            .sum::<f64>();
                        f[H_U_QR] += pair_entropy(p[0] + p[3], p[1] + p[2]);
                        f[H_V_QR] += pair_entropy(p[0] + p[2], p[1] + p[3]);
                        let alpha = mid[2 * a] / s;
                        let (u, v) = uv_of[i - 1][a];
                        let cu = a_half[2 * u as usize]
                            / (a_half[2 * u as usize] + a_half[2 * u as usize + 1]);
                        let cv = b_half[2 * v as usize]
                            / (b_half[2 * v as usize] + b_half[2 * v as usize + 1]);
                        let beta = cu * cv + (1.0 - cu) * (1.0 - cv);
                        let d = (beta - alpha).abs();
                        f[H_SUR] += s * h2(beta);
                        f[L1] += s * d;
                        f[L2SQ] += s * d * d;
                        f[H2_AVG] += s * h2(d);
                    }
                }
                for (a, &c) in acc.iter_mut().zip(&cur) {
                    *a += w * c;
                }
            }
            acc.push(ratio);
            acc
        });
        let ratio = parts.iter().map(|p| p[FIELDS * n]).fold(0.0, f64::max);
        let acc = pairwise_sum_vecs(parts);
        let col = |field: usize| -> Vec<f64> { (0..n).map(|i| acc[FIELDS * i + field]).collect() };
        Ok(Self {
            kernel: k.name().to_string(),
            n,
            psi0,
            half: Profile::exact(h_half, z_half),
            h_minus: col(H_MINUS),
            z_minus: col(Z_MINUS),
            h_plus: col(H_PLUS),
            z_plus: col(Z_PLUS),
            h_pair: col(H_PAIR),
            h_u_qr: col(H_U_QR),
            h_v_qr: col(H_V_QR),
            h_u_full: col(H_U_FULL),
            h_v_full: col(H_V_FULL),
            h_surrogate: col(H_SUR),
            l1: col(L1),
            l2sq: col(L2SQ),
            h2_avg: col(H2_AVG),
            zhat_minus: col(ZHAT_MINUS),
            zhat_plus: col(ZHAT_PLUS),
            max_density_ratio: ratio,
        })
    }
}

/// For each `i = 1..=N`, maps a length-`2i-2` prefix of the interleaved
/// block to the pair `(u_1^{i-1}, v_1^{i-1})` of prefix indices.
fn prefix_split_tables(n: usize) -> Vec<Vec<(u32, u32)>> {
    let mut out = vec![vec![(0u32, 0u32)]];
    for _ in 1..n {
        let prev = out.last().unwrap();
        let mut next = Vec::with_capacity(prev.len() * 4);
        for &(u, v) in prev {
            for t in 0..4u32 {
                let (odd, even) = (t >> 1, t & 1);
                next.push((2 * u + (odd ^ even), 2 * v + even));
            }
        }
        out.push(next);
    }
    out
}
