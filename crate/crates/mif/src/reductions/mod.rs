//! Reductions between MIF and other problems: the one-way AVOID protocol an
//! MIF automaton induces (Alice streams her set, Bob echoes), and the
//! FindCommonOutputs procedure for probing output functions.

mod avoid;
mod fco;

pub use avoid::{avoid_from_mif, avoid_lb, AvoidInstance, AvoidOutcome};
pub use fco::{
    fco, fco_params, noisy, CanonicalMinMissing, FcoParams, FcoResult, NoisyOutputFn, OutputFn,
    ThresholdMatrix,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("invalid AVOID instance: m={m}, a={a}, b={b}, delta={delta}")]
    InvalidAvoid { m: u64, a: u64, b: u64, delta: f64 },
    #[error("delta = 1 leaves the bound undefined")]
    DegenerateDelta,
    #[error("parameters out of range: {reason}")]
    BadParameters { reason: String },
    #[error("engine failure during protocol run: {0}")]
    Engine(#[from] crate::engine::EngineError),
}
