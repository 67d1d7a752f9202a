//! The streaming-automaton model and the algorithm-vs-adversary game.
//!
//! An [`Automaton`] is a finite-state (Moore-style) streaming algorithm with
//! a declared randomness mode and an explicit fixed-width state encoding, so
//! that `log2 |states|` is a measured quantity rather than documentation.
//! [`run_game`] drives one automaton against one [`Adversary`] for a full
//! stream and reports the verdict together with a space report.

mod automaton;
mod finite;
mod game;
mod oracle;
mod rng;
mod stats;
mod transcript;
mod types;

pub use automaton::{Automaton, BitSink, InitCtx, ModeRelax, OracleStepped, StepCtx};
pub(crate) use finite::chain_step as finite_chain_step;
pub use finite::{ChainAutomaton, FiniteAutomaton, TableChain, TransitionKind};
pub use game::{
    check_transcript, estimate_error, estimate_error_parallel, run_game, Adversary, ErrorEstimate,
    TrialRecord,
};
pub use oracle::{Oracle, OracleRng};
pub use rng::{mix2, mix3, sample_distinct, splitmix64, uniform_below};
pub use stats::{wilson_halfwidth, wilson_interval};
pub use transcript::Transcript;
pub use types::{GameResult, Instance, Output, RandomnessMode, SpaceReport, Verdict};

use thiserror::Error;

/// Errors raised by the game engine.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid instance: n={n}, ell={ell}, delta={delta}")]
    InvalidInstance { n: u64, ell: u64, delta: f64 },
    #[error("automaton universe {automaton_n} does not match instance universe {instance_n}")]
    UniverseMismatch { automaton_n: u64, instance_n: u64 },
    #[error("automaton capacity {capacity} is below stream length {ell}")]
    CapacityExceeded { capacity: u64, ell: u64 },
    #[error("adversary emitted item {item} outside universe [1, {n}]")]
    AdversaryRange { item: u64, n: u64 },
    #[error(
        "space contract violated at step {step}: state used {observed} bits, declared {declared}"
    )]
    SpaceContract {
        step: usize,
        observed: u64,
        declared: u64,
    },
    #[error("state encoder pushed value {value} that does not fit in {width} bits")]
    EncodingOverflow { value: u64, width: u32 },
}

/// `ceil(log2(x))` for `x >= 1`; the number of bits needed to address `x` values.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1 << 20), 20);
        assert_eq!(ceil_log2((1 << 20) + 1), 21);
    }
}
