use serde::Serialize;

use super::slices::{bits_index, transform_perm, Levels, SliceScratch, SliceSource};
use super::{check_cap, planned_slices, slice_chunk, OracleOptions};
use crate::info::{pair_bhattacharyya, pair_entropy};
use crate::par::{map_chunks, pairwise_sum_vecs};
use crate::process::{stationary_distribution, EdgeKernel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMethod {
    Exact,
    MonteCarlo,
}

impl ProfileMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileMethod::Exact => "exact",
            ProfileMethod::MonteCarlo => "mc",
        }
    }
}

/// Per-index `H(U_i | U_1^{i-1} Y_1^N)` and `Z(U_i | U_1^{i-1} Y_1^N)`.
/// Vectors are 0-based; entry `j` is synthetic index `j + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub n: usize,
    pub h: Vec<f64>,
    pub z: Vec<f64>,
    pub h_stderr: Vec<f64>,
    pub z_stderr: Vec<f64>,
    pub method: ProfileMethod,
    pub samples: usize,
}

impl Profile {
    pub fn exact(h: Vec<f64>, z: Vec<f64>) -> Self {
        let n = h.len();
        Self {
            n,
            h,
            z,
            h_stderr: vec![0.0; n],
            z_stderr: vec![0.0; n],
            method: ProfileMethod::Exact,
            samples: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mean_h(&self) -> f64 {
        self.h.iter().sum::<f64>() / self.n as f64
    }

    /// Residuals `(H - Z^2, log2(1 + Z) - H)` per index; both are
    /// non-negative for exact profiles.
    pub fn zh_residuals(&self) -> Vec<(f64, f64)> {
        self.h
            .iter()
            .zip(&self.z)
            .map(|(&h, &z)| (h - z * z, (1.0 + z).log2() - h))
            .collect()
    }
}

pub(crate) struct ProfileSums {
    pub h: Vec<f64>,
    pub z: Vec<f64>,
    pub mass: f64,
    pub block_entropy: f64,
}

pub(crate) fn profile_sums(
    k: &EdgeKernel,
    n: usize,
    given_state: Option<usize>,
    opts: &OracleOptions,
) -> Result<ProfileSums> {
    planned_slices(k, n, opts)?;
    if let Some(s) = given_state {
        if s >= k.num_states() {
            return Err(Error::IndexOutOfRange {
                index: s,
                n: k.num_states(),
            });
        }
    }
    let pi = stationary_distribution(k)?.pi;
    let src = SliceSource::new(k, n, pi, given_state);
    let perm = transform_perm(n);
    let list = src.weighted_slices(opts.use_symmetry);
    let parts = map_chunks(opts.exec, list.len(), slice_chunk(list.len()), |range| {
        let mut acc = vec![0.0; 2 * n + 2];
        let mut sc = SliceScratch::default();
        let mut table = vec![0.0; 1 << n];
        let mut lv = Levels::new(n);
        for &(y_idx, w) in &list[range] {
            src.fill(y_idx, &mut sc, &mut table);
            lv.load(&table, &perm);
            let py = lv.total();
            if py == 0.0 {
                continue;
            }
            acc[2 * n] += w * py;
            for i in 1..=n {
                let (mut h, mut z) = (0.0, 0.0);
                for pair in lv.level(i).chunks_exact(2) {
                    h += pair_entropy(pair[0], pair[1]);
                    z += pair_bhattacharyya(pair[0], pair[1]);
                }
                acc[i - 1] += w * h;
                acc[n + i - 1] += w * z;
            }
            acc[2 * n + 1] += w * table
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| p * (py / p).log2())
                .sum::<f64>();
        }
        acc
    });
    let acc = pairwise_sum_vecs(parts);
    Ok(ProfileSums {
        h: acc[..n].to_vec(),
        z: acc[n..2 * n].to_vec(),
        mass: acc[2 * n],
        block_entropy: acc[2 * n + 1],
    })
}

/// Exact profile by summation over every block; `given_state` conditions on
/// `S_1`.
pub fn exact_profile(k: &EdgeKernel, n: usize, given_state: Option<usize>) -> Result<Profile> {
    exact_profile_with(k, n, given_state, &OracleOptions::default())
}

pub fn exact_profile_with(
    k: &EdgeKernel,
    n: usize,
    given_state: Option<usize>,
    opts: &OracleOptions,
) -> Result<Profile> {
    let sums = profile_sums(k, n, given_state, opts)?;
    if sums.mass <= 0.0 {
        return Err(Error::ImpossibleEvent(0));
    }
    let norm = |v: Vec<f64>| {
        v.into_iter()
            .map(|x| (x / sums.mass).clamp(0.0, 1.0))
            .collect()
    };
    Ok(Profile::exact(norm(sums.h), norm(sums.z)))
}

/// `H(X_1^N | Y_1^N)` in bits, by direct summation.
pub fn exact_block_entropy(k: &EdgeKernel, n: usize) -> Result<f64> {
    let sums = profile_sums(k, n, None, &OracleOptions::default())?;
    Ok(sums.block_entropy / sums.mass)
}

/// `H(S_1 | U_1^j, Y_1^N)` for `j = 0..=N`.
pub fn exact_state_entropy(k: &EdgeKernel, n: usize) -> Result<Vec<f64>> {
    let opts = OracleOptions::default();
    planned_slices(k, n, &opts)?;
    let m = k.num_states();
    check_cap((m as u128) << n, opts.table_cap)?;
    let pi = stationary_distribution(k)?.pi;
    let sources: Vec<SliceSource> = (0..m)
        .map(|s| SliceSource::new(k, n, pi.clone(), Some(s)))
        .collect();
    let perm = transform_perm(n);
    let list = sources[0].weighted_slices(opts.use_symmetry);
    let parts = map_chunks(opts.exec, list.len(), slice_chunk(list.len()), |range| {
        let mut acc = vec![0.0; n + 1];
        let mut sc = SliceScratch::default();
        let mut table = vec![0.0; 1 << n];
        let mut per_state: Vec<Levels> = (0..m).map(|_| Levels::new(n)).collect();
        let mut total = Levels::new(n);
        let mut sum = vec![0.0; 1 << n];
        for &(y_idx, w) in &list[range] {
            sum.iter_mut().for_each(|v| *v = 0.0);
            for (src, lv) in sources.iter().zip(per_state.iter_mut()) {
                src.fill(y_idx, &mut sc, &mut table);
                lv.load(&table, &perm);
                for (s, &t) in sum.iter_mut().zip(&table) {
                    *s += t;
                }
            }
            total.load(&sum, &perm);
            for (j, a) in acc.iter_mut().enumerate() {
                let tot = total.level(j);
                for lv in &per_state {
                    for (&p, &t) in lv.level(j).iter().zip(tot) {
                        if p > 0.0 {
                            *a += w * p * (t / p).log2();
                        }
                    }
                }
            }
        }
        acc
    });
    Ok(pairwise_sum_vecs(parts))
}

/// Law of `U_1^N` given `S_1 = s1` for kernels without side information.
pub fn u_law_given_state(k: &EdgeKernel, n: usize, s1: usize) -> Result<Vec<f64>> {
    if k.num_obs() != 1 {
        return Err(Error::Domain("kernel has side information".into()));
    }
    let cond = ExactConditional::new(k, &vec![0; n], Some(s1))?;
    let top = cond.levels.level(n);
    Ok(top.iter().map(|&p| p / cond.mass).collect())
}

/// Exact conditional laws of `U_i` given `U_1^{i-1}` for one fixed `y_1^N`.
#[derive(Debug, Clone)]
pub struct ExactConditional {
    n: usize,
    levels: Levels,
    mass: f64,
}

impl ExactConditional {
    pub fn new(k: &EdgeKernel, y: &[usize], given_state: Option<usize>) -> Result<Self> {
        let n = y.len();
        let opts = OracleOptions::default();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        check_cap(1u128 << n, opts.table_cap)?;
        let q = k.num_obs();
        if let Some(&bad) = y.iter().find(|&&s| s >= q) {
            return Err(Error::IndexOutOfRange { index: bad, n: q });
        }
        let pi = stationary_distribution(k)?.pi;
        let src = SliceSource::new(k, n, pi, given_state);
        let y_idx = y.iter().fold(0, |acc, &s| acc * q + s);
        let mut table = vec![0.0; 1 << n];
        src.fill(y_idx, &mut SliceScratch::default(), &mut table);
        let mut levels = Levels::new(n);
        levels.load(&table, &transform_perm(n));
        let mass = levels.total();
        Ok(Self { n, levels, mass })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Probability of the observation sequence (joint with the state
    /// condition, if any).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `P(U_i = 0 | u_1^{i-1}, y)` with `i = prefix.len() + 1`; `None` when
    /// the prefix has probability zero.
    pub fn posterior(&self, prefix: &[u8]) -> Option<f64> {
        assert!(prefix.len() < self.n, "prefix too long");
        let a = bits_index(prefix);
        let lvl = self.levels.level(prefix.len() + 1);
        let (p0, p1) = (lvl[2 * a], lvl[2 * a + 1]);
        let s = p0 + p1;
        (s > 0.0).then(|| p0 / s)
    }

    /// Posteriors at every index along a full `u` block.
    pub fn posteriors_along(&self, u: &[u8]) -> Vec<Option<f64>> {
        (0..self.n).map(|i| self.posterior(&u[..i])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{make_iid, make_iid_bernoulli, make_periodic_bb00};

    #[test]
    fn uniform_iid_profile_is_flat() {
        let p = exact_profile(&make_iid_bernoulli(0.5).unwrap(), 8, None).unwrap();
        for i in 0..8 {
            assert!((p.h[i] - 1.0).abs() < 1e-12);
            assert!((p.z[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bb00_sixth_index_given_state() {
        let k = make_periodic_bb00();
        let p0 = exact_profile(&k, 8, Some(0)).unwrap();
        let p1 = exact_profile(&k, 8, Some(1)).unwrap();
        assert!((p0.h[5] - 1.0).abs() < 1e-12);
        assert!(p1.h[5].abs() < 1e-12);
    }

    #[test]
    fn erasure_side_information_at_two() {
        // y = x with probability 1/2, erased otherwise.
        let k = make_iid(&[vec![0.25, 0.0, 0.25], vec![0.0, 0.25, 0.25]]).unwrap();
        let p = exact_profile(&k, 2, None).unwrap();
        assert!((p.z[0] - 0.75).abs() < 1e-12);
        assert!((p.z[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_conservation() {
        let k = make_periodic_bb00();
        let p = exact_profile(&k, 8, None).unwrap();
        let block = exact_block_entropy(&k, 8).unwrap();
        assert!((p.h.iter().sum::<f64>() - block).abs() < 1e-9);
    }

    #[test]
    fn symmetry_reduction_is_exact() {
        let k = crate::process::make_gilbert_elliott(0.01, 0.2, 0.1, 0.2).unwrap();
        let full = OracleOptions {
            use_symmetry: false,
            ..OracleOptions::default()
        };
        let a = exact_profile_with(&k, 4, None, &OracleOptions::default()).unwrap();
        let b = exact_profile_with(&k, 4, None, &full).unwrap();
        for i in 0..4 {
            assert!((a.h[i] - b.h[i]).abs() < 1e-12);
            assert!((a.z[i] - b.z[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn first_index_is_block_parity() {
        let k = make_periodic_bb00();
        let c = ExactConditional::new(&k, &[0; 8], None).unwrap();
        // U_1 is the parity of the block, which covers four fair slots.
        assert!((c.posterior(&[]).unwrap() - 0.5).abs() < 1e-12);
        assert!((c.mass() - 1.0).abs() < 1e-12);
    }
}
