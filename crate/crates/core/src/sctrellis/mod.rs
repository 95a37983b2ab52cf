//! Successive cancellation with state-pair messages.
//!
//! A message over a span of the block carries, for each hypothesis of the
//! span's current synthetic bit, an `m x m` block indexed by entry and exit
//! state. Adjacent spans combine by matrix products, so a full sweep costs
//! `O(m^3 N log N)`.

mod engine;
mod genie;
mod message;

pub use engine::{sc_posteriors, Leaf, ScEngine};
pub use genie::{
    genie_profile_mc, genie_profile_mc_with, stratified_profile_mc, stratified_profile_mc_with,
};
pub use message::{combine_minus, combine_plus, leaf_message, StateMessage};
