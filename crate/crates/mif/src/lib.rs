//! Missing Item Finding (MIF) in the streaming model: algorithms for the
//! four randomness models, adversary strategies, algorithm-vs-adversary game
//! simulation, and evaluators for the known space-complexity bounds.
//!
//! The problem: given a stream of up to `ell` integers from `{1..n}`, report
//! after every input some integer that has not yet appeared. An algorithm is
//! adversarially robust if it stays correct when each input may depend on its
//! earlier outputs.
//!
//! Module map:
//! - [`engine`] — the finite-state streaming-automaton model, randomness
//!   contracts, game runner, and space accounting.
//! - [`algorithms`] — the MIF algorithm families (deterministic bitmap,
//!   oracle list, seeded block list, recursive random-tape) and the
//!   majority-vote amplifier.
//! - [`adversaries`] — static input strategies, the adaptive learning
//!   adversary with exact posterior tracking, and an exact minimax solver
//!   for micro instances.
//! - [`reductions`] — the AVOID one-way protocol built from an MIF automaton
//!   and the FindCommonOutputs procedure.
//! - [`analysis`] — closed-form space bound evaluation and CSV curve export.

pub mod adversaries;
pub mod algorithms;
pub mod analysis;
pub mod engine;
pub mod reductions;

pub use engine::{
    check_transcript, estimate_error, run_game, Adversary, Automaton, EngineError, ErrorEstimate,
    GameResult, Instance, Output, RandomnessMode, SpaceReport, Transcript, Verdict,
};
