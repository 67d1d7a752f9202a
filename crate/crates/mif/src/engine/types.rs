use std::fmt;

use crate::engine::EngineError;

/// A problem instance: streams of length `ell` over items `1..=n`, with a
/// target error probability `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    pub n: u64,
    pub ell: u64,
    pub delta: f64,
}

impl Instance {
    pub fn new(n: u64, ell: u64, delta: f64) -> Result<Self, EngineError> {
        if ell < 1 || ell > n || !(0.0..=1.0).contains(&delta) {
            return Err(EngineError::InvalidInstance { n, ell, delta });
        }
        Ok(Instance { n, ell, delta })
    }
}

/// How an automaton is allowed to use randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RandomnessMode {
    /// Fixed initial state; transitions and outputs never consult randomness.
    Deterministic,
    /// Random bits are available only when initializing, and they are stored
    /// in (and billed to) the state.
    RandomSeed,
    /// Fresh random bits on every transition, forgotten unless recorded in
    /// state; the output is a pure function of the state.
    RandomTape,
    /// One long random string drawn up front, readable everywhere for free.
    RandomOracle,
}

impl fmt::Display for RandomnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RandomnessMode::Deterministic => "deterministic",
            RandomnessMode::RandomSeed => "random-seed",
            RandomnessMode::RandomTape => "random-tape",
            RandomnessMode::RandomOracle => "random-oracle",
        };
        f.write_str(s)
    }
}

/// One reported output: an item in `[n]`, or the abort sentinel that ends the
/// run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Output {
    Item(u64),
    Abort,
}

impl Output {
    pub fn item(self) -> Option<u64> {
        match self {
            Output::Item(v) => Some(v),
            Output::Abort => None,
        }
    }

    pub fn is_abort(self) -> bool {
        matches!(self, Output::Abort)
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Item(v) => write!(f, "{v}"),
            Output::Abort => f.write_str("ABORT"),
        }
    }
}

/// Outcome of one run. `Mistake(step)` records the first step whose output
/// repeated an earlier input; `Abort(step)` the step at which the automaton
/// gave up. The two are mutually exclusive: the first failure event decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Mistake(usize),
    Abort(usize),
}

impl Verdict {
    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::Ok)
    }

    pub fn is_mistake(self) -> bool {
        matches!(self, Verdict::Mistake(_))
    }

    pub fn is_abort(self) -> bool {
        matches!(self, Verdict::Abort(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Ok => f.write_str("ok"),
            Verdict::Mistake(s) => write!(f, "mistake@{s}"),
            Verdict::Abort(s) => write!(f, "abort@{s}"),
        }
    }
}

/// Space accounting for one run: the bit budget the automaton declared up
/// front versus the widest state encoding actually observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceReport {
    pub declared_bits: u64,
    pub max_observed_bits: u64,
}

/// Verdict plus space report for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameResult {
    pub verdict: Verdict,
    pub space: SpaceReport,
}
