//! Input-generating strategies, from the static echo/random mixtures to the
//! adaptive learning adversary that tracks an exact posterior over the
//! automaton's states, plus an exact minimax solver for micro instances.

mod basic;
mod hset;
mod learner;
mod minimax;
mod posterior;
mod splitting;

pub use basic::{EchoAdversary, MixedAdversary, RandomAdversary, ReplayAdversary};
pub(crate) use hset::binomial as binomial_f64;
pub use hset::{compute_h, for_each_sorted_subset, HMode, HSets};
pub use learner::{LearnerOutcome, LearnerParams, LearningAdversary, PhaseRecord};
pub use minimax::{exhaustive_minimax_mistake, minimax_worst_error, MinimaxReport, SearchBudget};
pub use posterior::{posterior_update, Posterior};
pub use splitting::{find_splitting, SplittingPlan};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("state space too large for exact analysis: {states} states > cap {cap}")]
    StateCapExceeded { states: usize, cap: usize },
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },
    #[error("exact analysis needs a deterministic, seed, or tape chain; got {mode}")]
    UnsupportedMode { mode: crate::engine::RandomnessMode },
    #[error("transcript is inconsistent with the automaton (posterior support is empty)")]
    InconsistentTranscript,
    #[error("{0}")]
    Infeasible(String),
}
