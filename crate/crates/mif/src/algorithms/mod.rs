//! The MIF algorithm families.
//!
//! - [`DetBitmap`] — deterministic, `ell+1` bits, never fails.
//! - [`OracleList`] — random oracle; tracks coverage of a free random list.
//! - [`SeedBlock`] — random seed; a random list of blocks with a
//!   deterministic inner algorithm run inside the active block.
//! - [`RtMif`] — the recursive random-tape algorithm, a traversal over the
//!   leaves of an implicit random tree, with parameters from [`RtParams`].
//! - [`MajorityVote`] — error amplification by voting over parallel copies.

mod amplify;
mod det_bitmap;
mod oracle_list;
mod params;
mod rt;
mod seed_block;

pub use amplify::MajorityVote;
pub use det_bitmap::DetBitmap;
pub use oracle_list::OracleList;
pub use params::{fract_power_round_u, rt_params, RtParams};
pub use rt::RtMif;
pub use seed_block::SeedBlock;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error("instance out of range for this construction: {reason}")]
    Unsupported { reason: String },
    #[error("derived parameters violate an invariant: {reason}")]
    ParameterInvariant { reason: String },
}
