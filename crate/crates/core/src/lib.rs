//! Polar transforms over binary processes with memory.
//!
//! The crate is organised around a single process representation,
//! [`process::EdgeKernel`], a stationary finite-state law over
//! `(state, bit, observation)` edges. Everything else is built on it:
//!
//! - [`transform`]: the `x * B_N * G_N` transform over GF(2) and index bookkeeping.
//! - [`oracle`]: exact small-N joint laws, entropy/Bhattacharyya profiles and
//!   numeric checks of the polarization inequalities.
//! - [`sctrellis`]: successive cancellation with state-pair messages, used for
//!   genie-aided Monte-Carlo profiles at large N.
//! - [`codec`]: polar source coding with decoder side information.
//! - [`harness`]: experiment drivers behind the `polarlab` CLI.
//!
//! Monte-Carlo and slice-wise oracle work fans out through [`par`], which
//! uses rayon when the `parallel` feature is enabled and runs sequentially
//! otherwise. Results are bit-identical in both modes.

pub mod codec;
pub mod error;
pub mod harness;
pub mod info;
pub mod oracle;
pub mod par;
pub mod process;
pub mod sctrellis;
pub mod transform;

pub use error::{Error, Result};
