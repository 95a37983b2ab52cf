use serde::Serialize;

use super::pair::PairAnalysis;
use super::profile::{u_law_given_state, Profile};
use super::slices::{SliceScratch, SliceSource};
use super::{check_block, check_cap, OracleOptions};
use crate::info::{bin_conv, h2, h2_inv};
use crate::process::{psi_k_bound, stationary_distribution, EdgeKernel};
use crate::{Error, Result};

/// Uniform check report. Residuals are oriented so that `>= -tol` means the
/// inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub kernel: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub residuals: Vec<f64>,
    pub min_residual: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(
        check_name: impl Into<String>,
        kernel: impl Into<String>,
        n: usize,
        residuals: Vec<f64>,
        tol: f64,
    ) -> Self {
        let min_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);
        let pass = residuals.iter().all(|&r| r >= -tol);
        Self {
            check_name: check_name.into(),
            kernel: kernel.into(),
            n,
            residuals,
            min_residual,
            pass,
        }
    }
}

/// Default tolerance for entropy-valued residuals.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SupermartingaleResult {
    /// `2 H(U_i | Q_i) - [H^{b0} + H^{b1}]`.
    pub slack: Vec<f64>,
    /// `|H^{b0} + H^{b1} - H(U_i, V_i | Q_i, R_i)|`.
    pub chain_error: Vec<f64>,
}

impl PairAnalysis {
    pub fn supermartingale(&self) -> SupermartingaleResult {
        let slack = (0..self.n)
            .map(|i| 2.0 * self.half.h[i] - (self.h_minus[i] + self.h_plus[i]))
            .collect();
        let chain_error = (0..self.n)
            .map(|i| (self.h_minus[i] + self.h_plus[i] - self.h_pair[i]).abs())
            .collect();
        SupermartingaleResult { slack, chain_error }
    }

    pub fn lemma1(&self) -> Lemma1Terms {
        let n = self.n;
        let hq = &self.half.h;
        let parent_u: Vec<f64> = (0..n).map(|i| hq[i] - self.h_u_full[i]).collect();
        let parent_v: Vec<f64> = (0..n).map(|i| hq[i] - self.h_v_full[i]).collect();
        Lemma1Terms {
            sum_u: parent_u.iter().sum(),
            sum_v: parent_v.iter().sum(),
            parent_u,
            parent_v,
            i_u_r_given_q: (0..n).map(|i| hq[i] - self.h_u_qr[i]).collect(),
            i_v_q_given_r: (0..n).map(|i| hq[i] - self.h_v_qr[i]).collect(),
            i_u_v_given_qr: (0..n)
                .map(|i| self.h_u_qr[i] + self.h_v_qr[i] - self.h_pair[i])
                .collect(),
            log_psi0: self.psi0.log2(),
        }
    }

    pub fn surrogate(&self) -> Vec<SurrogateGap> {
        let l1 = self.lemma1();
        (0..self.n)
            .map(|i| {
                let i_uv = l1.i_u_v_given_qr[i].max(0.0);
                let divergence =
                    (l1.i_u_r_given_q[i] + l1.i_v_q_given_r[i] + l1.i_u_v_given_qr[i]).max(0.0);
                SurrogateGap {
                    index: i + 1,
                    gap: (self.h_surrogate[i] - self.h_minus[i]).abs(),
                    mutual_info: i_uv,
                    divergence,
                    bound: pinsker_entropy_bound(i_uv),
                    divergence_bound: pinsker_entropy_bound(divergence),
                    mean_h2_diff: self.h2_avg[i],
                    mean_abs_diff: self.l1[i],
                    mean_sq_diff: self.l2sq[i],
                }
            })
            .collect()
    }

    pub fn z_recursion(&self) -> ZRecursion {
        let k = 2.0 * self.psi0;
        let zb = &self.half.z;
        let r = |f: &dyn Fn(usize) -> f64| (0..self.n).map(f).collect::<Vec<_>>();
        ZRecursion {
            psi0: self.psi0,
            minus: r(&|i| k * zb[i] - self.z_minus[i]),
            plus: r(&|i| self.psi0 * zb[i] * zb[i] - self.z_plus[i]),
            product_minus: r(&|i| 2.0 * zb[i] - self.zhat_minus[i]),
            product_plus: r(&|i| zb[i] * zb[i] - self.zhat_plus[i]),
            density: self.psi0 * (1.0 + 1e-12) - self.max_density_ratio,
        }
    }

    /// All two-block reports with the standard tolerance.
    pub fn reports(&self) -> Vec<CheckReport> {
        let (name, n) = (self.kernel.as_str(), self.n);
        let sm = self.supermartingale();
        let l1 = self.lemma1();
        let sg = self.surrogate();
        let zr = self.z_recursion();
        let chain: Vec<f64> = sm.chain_error.iter().map(|e| -e).collect();
        vec![
            CheckReport::new("supermartingale", name, n, sm.slack.clone(), CHECK_TOL),
            CheckReport::new("child_chain_rule", name, n, chain, CHECK_TOL),
            CheckReport::new("lemma1_terms", name, n, l1.residuals(), CHECK_TOL),
            CheckReport::new(
                "surrogate_gap",
                name,
                n,
                sg.iter().map(|s| s.bound - s.gap).collect(),
                CHECK_TOL,
            ),
            CheckReport::new(
                "surrogate_chain",
                name,
                n,
                sg.iter().flat_map(SurrogateGap::chain_residuals).collect(),
                CHECK_TOL,
            ),
            CheckReport::new("z_recursion", name, n, zr.residuals(), CHECK_TOL),
            CheckReport::new("zh_relations", name, n, zh_residuals(&self.half), CHECK_TOL),
        ]
    }
}

fn zh_residuals(p: &Profile) -> Vec<f64> {
    p.zh_residuals()
        .into_iter()
        .flat_map(|(a, b)| [a, b])
        .collect()
}

/// Z-H relation report for any exact profile.
pub fn zh_relations_report(p: &Profile, kernel: &str) -> CheckReport {
    CheckReport::new("zh_relations", kernel, p.n, zh_residuals(p), CHECK_TOL)
}

pub fn supermartingale_check(k: &EdgeKernel, n: usize) -> Result<SupermartingaleResult> {
    Ok(PairAnalysis::compute(k, n)?.supermartingale())
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Terms {
    /// `I(U_i; V_i R_i V_{i+1}^N | Q_i)`.
    pub parent_u: Vec<f64>,
    /// `I(V_i; U_i Q_i U_{i+1}^N | R_i)`.
    pub parent_v: Vec<f64>,
    pub i_u_r_given_q: Vec<f64>,
    pub i_v_q_given_r: Vec<f64>,
    pub i_u_v_given_qr: Vec<f64>,
    pub sum_u: f64,
    pub sum_v: f64,
    pub log_psi0: f64,
}

impl Lemma1Terms {
    /// Non-negativity of every term, domination of sub-terms by their
    /// parents, and both sums below `log2 psi0`.
    pub fn residuals(&self) -> Vec<f64> {
        let n = self.parent_u.len();
        let mut r = Vec::with_capacity(7 * n + 2);
        for i in 0..n {
            r.extend([
                self.parent_u[i],
                self.parent_v[i],
                self.i_u_r_given_q[i],
                self.i_v_q_given_r[i],
                self.i_u_v_given_qr[i],
                self.parent_u[i] - self.i_u_r_given_q[i] - self.i_u_v_given_qr[i],
                self.parent_v[i] - self.i_v_q_given_r[i] - self.i_u_v_given_qr[i],
            ]);
        }
        r.push(self.log_psi0 - self.sum_u);
        r.push(self.log_psi0 - self.sum_v);
        r
    }
}

pub fn lemma1_mi_terms(k: &EdgeKernel, n: usize) -> Result<Lemma1Terms> {
    Ok(PairAnalysis::compute(k, n)?.lemma1())
}

/// `h2(sqrt(x ln 2))`, saturating at 1 once the argument passes 1/2.
pub fn pinsker_entropy_bound(x: f64) -> f64 {
    let arg = (x.max(0.0) * std::f64::consts::LN_2).sqrt();
    if arg > 0.5 {
        1.0
    } else {
        h2(arg)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SurrogateGap {
    pub index: usize,
    /// `|H(U~ + V~ | Q, R) - H(U + V | Q, R)|`.
    pub gap: f64,
    /// `I(U_i; V_i | Q_i, R_i)`.
    pub mutual_info: f64,
    /// `E D(p(u, v | q, r) || p(u | q) p(v | r))`, which equals the sum of
    /// the three almost-independence terms.
    pub divergence: f64,
    /// `h2(sqrt(I ln 2))`.
    pub bound: f64,
    /// `h2(sqrt(D ln 2))`.
    pub divergence_bound: f64,
    pub mean_h2_diff: f64,
    pub mean_abs_diff: f64,
    pub mean_sq_diff: f64,
}

impl SurrogateGap {
    /// Each step of the bounding chain, oriented `>= 0`.
    pub fn chain_residuals(&self) -> Vec<f64> {
        vec![
            self.mean_h2_diff - self.gap,
            h2(self.mean_abs_diff.min(0.5)) - self.mean_h2_diff,
            self.mean_sq_diff.sqrt() - self.mean_abs_diff,
            self.divergence * std::f64::consts::LN_2 - self.mean_sq_diff,
            self.divergence_bound - self.gap,
        ]
    }
}

/// Surrogate gap and bound at one index `i` (1-based).
pub fn surrogate_gap(k: &EdgeKernel, n: usize, i: usize) -> Result<(f64, f64)> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let s = &PairAnalysis::compute(k, n)?.surrogate()[i - 1];
    Ok((s.gap, s.bound))
}

#[derive(Debug, Clone, Serialize)]
pub struct ZRecursion {
    pub psi0: f64,
    /// `2 psi0 Z^b - Z^{b0}`.
    pub minus: Vec<f64>,
    /// `psi0 (Z^b)^2 - Z^{b1}`.
    pub plus: Vec<f64>,
    /// `2 Z^b - Z^{b0}` under the product law.
    pub product_minus: Vec<f64>,
    /// `(Z^b)^2 - Z^{b1}` under the product law.
    pub product_plus: Vec<f64>,
    /// `psi0 - max density ratio` against the product law.
    pub density: f64,
}

impl ZRecursion {
    pub fn residuals(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self
            .minus
            .iter()
            .chain(&self.plus)
            .chain(&self.product_minus)
            .chain(&self.product_plus)
            .copied()
            .collect();
        r.push(self.density);
        r
    }
}

pub fn z_recursion_check(k: &EdgeKernel, n: usize) -> Result<ZRecursion> {
    Ok(PairAnalysis::compute(k, n)?.z_recursion())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `(2/ln 2) (beta(1-beta)|1-2alpha| + alpha(1-alpha)|1-2beta|)^2`.
pub fn xor_gain_bound(alpha: f64, beta: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let t = beta * (1.0 - beta) * (1.0 - 2.0 * alpha).abs()
        + alpha * (1.0 - alpha) * (1.0 - 2.0 * beta).abs();
    Ok(2.0 / std::f64::consts::LN_2 * t * t)
}

/// `h2(alpha * beta) - (h2(alpha) + h2(beta)) / 2`.
pub fn xor_gain_actual(alpha: f64, beta: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    Ok(h2(bin_conv(alpha, beta)) - 0.5 * (h2(alpha) + h2(beta)))
}

/// `h2(|beta - alpha|) - |h2(beta) - h2(alpha)|`.
pub fn h2_diff_check(alpha: f64, beta: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    Ok(h2((beta - alpha).abs()) - (h2(beta) - h2(alpha)).abs())
}

/// `sigma = min(h2^{-1}(xi), 1/2 - h2^{-1}(1 - xi))` and
/// `Delta = (2/ln 2) sigma^4 (1 - sigma)^2`.
pub fn delta_xi(xi: f64) -> Result<(f64, f64)> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!("xi = {xi} outside (0, 1)")));
    }
    let sigma = h2_inv(xi).min(0.5 - h2_inv(1.0 - xi));
    let delta = 2.0 / std::f64::consts::LN_2 * sigma.powi(4) * (1.0 - sigma).powi(2);
    Ok((sigma, delta))
}

/// Grid sweep of the XOR gain bound; returns `actual - bound` per point.
pub fn xor_gain_grid(step: f64) -> Vec<f64> {
    let pts: Vec<f64> = (0..)
        .map(|j| j as f64 * step)
        .take_while(|&a| a <= 0.5 + 1e-12)
        .map(|a| a.min(0.5))
        .collect();
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for &a in &pts {
        for &b in &pts {
            out.push(xor_gain_actual(a, b).unwrap() - xor_gain_bound(a, b).unwrap());
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct NoStuck {
    pub p_a0: f64,
    pub p_ab01: f64,
    pub p_ac00: f64,
    pub psi_n: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub residual: f64,
    /// `psi_N p_A(0) p_C(0) - p_AC(0, 0)` for the separated third block.
    pub mixing_residual: f64,
}

/// Exact evaluation of the no-collusion chain for `A = f(block 1)`,
/// `B = f(block 2)`, `C = f(block 3)`.
///
/// Block statistics are propagated through transfer matrices
/// `M_b[s, s'] = P(f = b, S_N = s' | S_0 = s)`.
pub fn nostuck_check(
    k: &EdgeKernel,
    n: usize,
    f: &dyn Fn(&[u8], &[usize]) -> bool,
) -> Result<NoStuck> {
    let opts = OracleOptions::default();
    check_block(n, &opts)?;
    let m = k.num_states();
    check_cap(
        (m as u128 * k.num_obs().pow(n as u32) as u128) << n,
        opts.work_cap,
    )?;
    let pi = stationary_distribution(k)?.pi;
    let psi_n = psi_k_bound(k, n)?;
    let src = SliceSource::new(k, n, pi.clone(), None);
    let mut sc = SliceScratch::default();
    let mut mats = [vec![0.0; m * m], vec![0.0; m * m]];
    let mut y = Vec::new();
    let mut x = vec![0u8; n];
    let mut init = vec![0.0; m];
    for y_idx in 0..src.num_slices() {
        src.decode_y(y_idx, &mut y);
        let outcomes: Vec<usize> = (0..1usize << n)
            .map(|xi| {
                for (j, b) in x.iter_mut().enumerate() {
                    *b = ((xi >> (n - 1 - j)) & 1) as u8;
                }
                f(&x, &y) as usize
            })
            .collect();
        for s0 in 0..m {
            init.iter_mut()
                .enumerate()
                .for_each(|(s, v)| *v = (s == s0) as u8 as f64);
            let states = src.fill_states_from(&init, y_idx, &mut sc);
            for (xi, row) in states.chunks_exact(m).enumerate() {
                let mat = &mut mats[outcomes[xi]];
                for (s1, &p) in row.iter().enumerate() {
                    mat[s0 * m + s1] += p;
                }
            }
        }
    }
    let row_times = |v: &[f64], mat: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|s2| (0..m).map(|s| v[s] * mat[s * m + s2]).sum())
            .collect()
    };
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let after_a0 = row_times(&pi, &mats[0]);
    let p_a0 = sum(&after_a0);
    let p_ab01 = sum(&row_times(&after_a0, &mats[1]));
    let both: Vec<f64> = mats[0].iter().zip(&mats[1]).map(|(a, b)| a + b).collect();
    let p_ac00 = sum(&row_times(&row_times(&after_a0, &both), &mats[0]));
    let lhs = 2.0 * p_ab01;
    let rhs = p_a0 * (1.0 - psi_n * p_a0);
    Ok(NoStuck {
        p_a0,
        p_ab01,
        p_ac00,
        psi_n,
        lhs,
        rhs,
        residual: lhs - rhs,
        mixing_residual: psi_n * p_a0 * p_a0 - p_ac00,
    })
}

/// A reproducible random boolean function of a block.
pub fn random_block_function(
    n: usize,
    num_obs: usize,
    seed: u64,
) -> impl Fn(&[u8], &[usize]) -> bool {
    use rand::{Rng, SeedableRng};
    let size = num_obs.pow(n as u32) << n;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bias: f64 = rng.gen_range(0.05..0.95);
    let table: Vec<bool> = (0..size).map(|_| rng.gen_bool(bias)).collect();
    move |x: &[u8], y: &[usize]| {
        let yi = y.iter().fold(0, |acc, &s| acc * num_obs + s);
        let xi = x.iter().fold(0, |acc, &b| (acc << 1) | b as usize);
        table[(yi << x.len()) + xi]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub s1: usize,
    pub statement: String,
    pub residual: f64,
    pub pass: bool,
}

/// Structural facts about `U_1^6` of the period-4 process at `N = 8`,
/// conditioned on each initial state. Residuals are distances from the
/// asserted value and must be at most `1e-12`.
pub fn table2_checks(k: &EdgeKernel) -> Result<Vec<Assertion>> {
    const N: usize = 8;
    const TOL: f64 = 1e-12;
    if k.num_states() != 4 || k.num_obs() != 1 {
        return Err(Error::Domain("expects the 4-state period-4 process".into()));
    }
    let laws: Vec<Vec<f64>> = (0..4)
        .map(|s| u_law_given_state(k, N, s))
        .collect::<Result<_>>()?;
    let bit = |u: usize, j: usize| (u >> (N - j)) & 1;
    let prob = |s: usize, pred: &dyn Fn(usize) -> bool| -> f64 {
        laws[s]
            .iter()
            .enumerate()
            .filter(|(u, _)| pred(*u))
            .map(|(_, &p)| p)
            .sum()
    };
    let mut out = Vec::new();
    let mut push = |s1: usize, statement: &str, residual: f64| {
        out.push(Assertion {
            s1,
            statement: statement.into(),
            residual,
            pass: residual.abs() <= TOL,
        });
    };

    push(0, "Pr(U4 = 0) = 1", prob(0, &|u| bit(u, 4) == 1));
    // entropy of U6 and its independence from U_1^5
    let mut first6 = vec![0.0; 64];
    for (u, &p) in laws[0].iter().enumerate() {
        first6[u >> 2] += p;
    }
    let p_u6 = first6
        .iter()
        .enumerate()
        .filter(|(v, _)| v & 1 == 0)
        .map(|(_, &p)| p)
        .sum::<f64>();
    let h_u6 = h2(p_u6);
    let h_u6_given = first6
        .chunks_exact(2)
        .map(|c| crate::info::pair_entropy(c[0], c[1]))
        .sum::<f64>();
    push(
        0,
        "I(U6; U_1^5) = 0 and H(U6) = 1",
        (h_u6 - h_u6_given).abs() + (1.0 - h_u6).abs(),
    );

    push(1, "U5 = U3 a.s.", prob(1, &|u| bit(u, 5) != bit(u, 3)));
    push(1, "U6 = U4 a.s.", prob(1, &|u| bit(u, 6) != bit(u, 4)));
    let iid = (0..4)
        .map(|c| (prob(1, &|u| bit(u, 2) == c >> 1 && bit(u, 4) == c & 1) - 0.25).abs())
        .fold(0.0, f64::max);
    push(1, "(U2, U4) i.i.d. Ber(1/2)", iid);

    push(2, "U4 = U2 a.s.", prob(2, &|u| bit(u, 4) != bit(u, 2)));

    push(
        3,
        "U5 = U1 + U3 a.s.",
        prob(3, &|u| bit(u, 5) != bit(u, 1) ^ bit(u, 3)),
    );
    push(
        3,
        "U6 = U2 + U4 a.s.",
        prob(3, &|u| bit(u, 6) != bit(u, 2) ^ bit(u, 4)),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn xor_gain_examples() {
        assert_abs_diff_eq!(xor_gain_bound(0.5, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(xor_gain_actual(0.5, 0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xor_gain_bound(0.0, 0.5).unwrap(), 0.180337, epsilon = 1e-6);
        assert_abs_diff_eq!(xor_gain_actual(0.0, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert!(xor_gain_grid(0.05).iter().all(|&r| r >= -1e-12));
        assert!(xor_gain_bound(-0.1, 0.2).is_err());
    }

    #[test]
    fn h2_diff_examples() {
        assert_abs_diff_eq!(h2_diff_check(0.3, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(h2_diff_check(0.0, 0.5).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn delta_xi_examples() {
        let (s, d) = delta_xi(1.0 - 1e-15).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-6);
        // (2/ln 2) * 2^-6
        assert_abs_diff_eq!(d, 0.0450842, epsilon = 1e-6);
        let (s, _) = delta_xi(0.5).unwrap();
        assert_abs_diff_eq!(s, 0.110028, epsilon = 1e-6);
        assert!(delta_xi(0.0).is_err());
    }

    #[test]
    fn pinsker_bound_saturates() {
        assert_eq!(pinsker_entropy_bound(10.0), 1.0);
        assert_eq!(pinsker_entropy_bound(0.0), 0.0);
    }
}
