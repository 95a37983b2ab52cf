use serde::Serialize;

use super::slices::{bits_index, SliceScratch, SliceSource};
use super::{check_cap, OracleOptions};
use crate::process::{stationary_distribution, EdgeKernel};
use crate::{Error, Result};

/// Explicit table of `p(x_1^N, y_1^N)`, indexed `[y * 2^N + x]` with both
/// sequences read most-significant-first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointLaw {
    n: usize,
    num_obs: usize,
    table: Vec<f64>,
}

impl JointLaw {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_obs(&self) -> usize {
        self.num_obs
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Builds a law from an explicit table; validates shape and mass.
    pub fn from_table(n: usize, num_obs: usize, table: Vec<f64>) -> Result<Self> {
        let want = (num_obs as u128).pow(n as u32) << n;
        if table.len() as u128 != want {
            return Err(Error::DimensionMismatch(format!(
                "table has {} entries, expected {want}",
                table.len()
            )));
        }
        if table.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidDistribution("negative or NaN entry".into()));
        }
        let law = Self { n, num_obs, table };
        if (law.total() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "total mass {}",
                law.total()
            )));
        }
        Ok(law)
    }

    fn y_index(&self, y: &[usize]) -> usize {
        y.iter().fold(0, |acc, &s| acc * self.num_obs + s)
    }

    pub fn prob(&self, x: &[u8], y: &[usize]) -> f64 {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        self.table[(self.y_index(y) << self.n) + bits_index(x)]
    }

    /// The slice `x -> p(x, y)` for a fixed observation sequence.
    pub fn x_slice(&self, y: &[usize]) -> &[f64] {
        let base = self.y_index(y) << self.n;
        &self.table[base..base + (1usize << self.n)]
    }
}

/// Exact joint law of one block under the stationary initial law.
pub fn enumerate_joint(k: &EdgeKernel, n: usize) -> Result<JointLaw> {
    enumerate_joint_with(k, n, &OracleOptions::default())
}

pub fn enumerate_joint_with(k: &EdgeKernel, n: usize, opts: &OracleOptions) -> Result<JointLaw> {
    let q = k.num_obs();
    check_cap((q as u128).pow(n as u32) << n, opts.table_cap)?;
    let pi = stationary_distribution(k)?.pi;
    let src = SliceSource::new(k, n, pi, None);
    let width = 1usize << n;
    let mut table = vec![0.0; src.num_slices() * width];
    let mut sc = SliceScratch::default();
    for (y_idx, out) in table.chunks_exact_mut(width).enumerate() {
        src.fill(y_idx, &mut sc, out);
    }
    Ok(JointLaw {
        n,
        num_obs: q,
        table,
    })
}
