use serde::Serialize;

use crate::oracle::{Profile, ProfileMethod};
use crate::{Error, Result};

/// How the reliable/frozen split is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum DesignRule {
    /// Freeze exactly this many indices, highest `H` first.
    Budget(usize),
    /// Freeze every index with `Z >= tau`.
    Threshold(f64),
}

/// Indices (1-based, sorted) whose `u` values are sent verbatim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrozenSet {
    n: usize,
    indices: Vec<usize>,
    pub rule: DesignRule,
    pub profile_method: ProfileMethod,
    /// Sum of the design profile's `Z` over the reconstructed indices.
    pub z_sum_bound: f64,
}

impl FrozenSet {
    /// A set built directly from indices; the bound is left unknown (1.0
    /// per reconstructed index, the trivial value).
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        let z_sum_bound = (n - indices.len()) as f64;
        Ok(Self {
            n,
            rule: DesignRule::Budget(indices.len()),
            indices,
            profile_method: ProfileMethod::Exact,
            z_sum_bound,
        })
    }

    pub fn all(n: usize) -> Self {
        Self::from_indices(n, (1..=n).collect()).expect("in range")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Membership mask over 0-based positions.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.indices {
            m[i - 1] = true;
        }
        m
    }

    pub fn rate(&self) -> f64 {
        self.len() as f64 / self.n as f64
    }
}

pub fn design_code(profile: &Profile, rule: DesignRule) -> Result<FrozenSet> {
    let n = profile.n;
    if profile.h.len() != n || profile.z.len() != n {
        return Err(Error::DimensionMismatch(
            "profile does not cover every index".into(),
        ));
    }
    let mut chosen: Vec<usize> = match rule {
        DesignRule::Budget(b) => {
            if b > n {
                return Err(Error::Domain(format!("budget {b} exceeds N = {n}")));
            }
            let mut order: Vec<usize> = (0..n).collect();
            // stable sort keeps smaller indices first among ties
            order.sort_by(|&a, &b| profile.h[b].total_cmp(&profile.h[a]));
            order.truncate(b);
            order
        }
        DesignRule::Threshold(tau) => {
            if !tau.is_finite() {
                return Err(Error::Domain(format!("threshold {tau}")));
            }
            (0..n).filter(|&i| profile.z[i] >= tau).collect()
        }
    };
    chosen.sort_unstable();
    let mut frozen = vec![false; n];
    chosen.iter().for_each(|&i| frozen[i] = true);
    let z_sum_bound = (0..n).filter(|&i| !frozen[i]).map(|i| profile.z[i]).sum();
    Ok(FrozenSet {
        n,
        indices: chosen.into_iter().map(|i| i + 1).collect(),
        rule,
        profile_method: profile.method,
        z_sum_bound,
    })
}
