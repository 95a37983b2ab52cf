//! Exact small-block computations: joint laws, entropy and Bhattacharyya
//! profiles, and numeric checks of the polarization inequalities.
//!
//! Block laws are never materialized as a whole. They are streamed one
//! observation sequence at a time, so memory is bounded by
//! [`OracleOptions::table_cap`] while total work is bounded by
//! [`OracleOptions::work_cap`].

mod checks;
mod joint;
mod pair;
mod profile;
pub(crate) mod slices;

pub use checks::{
    delta_xi, h2_diff_check, lemma1_mi_terms, nostuck_check, pinsker_entropy_bound,
    random_block_function, supermartingale_check, surrogate_gap, table2_checks, xor_gain_actual,
    xor_gain_bound, xor_gain_grid, z_recursion_check, zh_relations_report, Assertion, CheckReport,
    Lemma1Terms, NoStuck, SupermartingaleResult, SurrogateGap, ZRecursion, CHECK_TOL,
};
pub use joint::{enumerate_joint, enumerate_joint_with, JointLaw};
pub use pair::PairAnalysis;
pub use profile::{
    exact_block_entropy, exact_profile, exact_profile_with, exact_state_entropy, u_law_given_state,
    ExactConditional, Profile, ProfileMethod,
};

use crate::par::Exec;
use crate::process::EdgeKernel;
use crate::{Error, Result};

/// Size limits for exact computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Largest table held in memory at once, in entries.
    pub table_cap: u128,
    /// Largest total number of block probabilities visited.
    pub work_cap: u128,
    /// Visit one representative per class of equivalent observation
    /// sequences (see the slice module); exact, and much cheaper for
    /// output-symmetric kernels.
    pub use_symmetry: bool,
    pub exec: Exec,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            table_cap: 1 << 24,
            work_cap: 1 << 32,
            use_symmetry: true,
            exec: Exec::default(),
        }
    }
}

pub(crate) fn check_cap(needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    Ok(())
}

/// Validates a block length `n` against the table cap.
pub(crate) fn check_block(n: usize, opts: &OracleOptions) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if n >= 64 {
        return Err(Error::CapExceeded {
            needed: u128::MAX,
            cap: opts.table_cap,
        });
    }
    check_cap(1u128 << n, opts.table_cap)
}

/// Number of slices that a length-`n` pass visits, checked against the
/// work cap before any enumeration.
pub(crate) fn planned_slices(k: &EdgeKernel, n: usize, opts: &OracleOptions) -> Result<u128> {
    check_block(n, opts)?;
    let classes = if opts.use_symmetry {
        let c = slices::observation_classes(k);
        (0..k.num_obs()).filter(|&y| c.rep[y] == y).count()
    } else {
        k.num_obs()
    };
    let slices = (classes as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    check_cap(slices.saturating_mul(1u128 << n), opts.work_cap)?;
    Ok(slices)
}

/// Number of observation slices per parallel work item.
pub(crate) fn slice_chunk(slices: usize) -> usize {
    (slices / 256).max(1)
}
