use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::engine::oracle::Oracle;
use crate::engine::types::{Output, RandomnessMode};
use crate::engine::{ceil_log2, EngineError};

/// Write-only bit counter used to measure state widths. `push` checks that
/// the value actually fits the claimed width, which keeps encodings honest.
#[derive(Debug, Default)]
pub struct BitSink {
    bits: u64,
    overflow: Option<(u64, u32)>,
}

impl BitSink {
    pub fn new() -> Self {
        BitSink::default()
    }

    pub fn push(&mut self, value: u64, width: u32) {
        if width < 64 && value >> width != 0 && self.overflow.is_none() {
            self.overflow = Some((value, width));
        }
        self.bits += width as u64;
    }

    pub fn push_bit(&mut self, b: bool) {
        self.push(b as u64, 1);
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn check(&self) -> Result<u64, EngineError> {
        match self.overflow {
            Some((value, width)) => Err(EngineError::EncodingOverflow { value, width }),
            None => Ok(self.bits),
        }
    }
}

/// Randomness offered to an automaton at initialization. The engine builds
/// the variant matching the automaton's declared mode, so an automaton can
/// only consume what its mode permits.
pub enum InitCtx<'a> {
    /// Deterministic mode: fixed initial state, nothing to draw.
    Fixed,
    /// Random-seed and random-tape modes: the initial state may be sampled.
    Seeded(&'a mut ChaCha12Rng),
    /// Random-oracle mode: the automaton captures the oracle handle and may
    /// read from it at any time; oracle reads cost no space.
    Oracle(Oracle),
}

impl InitCtx<'_> {
    /// The init-time entropy source, if the mode has one.
    pub fn rng(&mut self) -> Option<&mut dyn RngCore> {
        match self {
            InitCtx::Fixed => None,
            InitCtx::Seeded(rng) => Some(*rng),
            InitCtx::Oracle(_) => None,
        }
    }
}

/// Randomness offered on one update. Only random-tape automata receive fresh
/// bits here; everyone else gets `Silent`.
pub enum StepCtx<'a> {
    Silent,
    Tape(&'a mut ChaCha12Rng),
}

impl StepCtx<'_> {
    pub fn tape(&mut self) -> &mut dyn RngCore {
        match self {
            StepCtx::Tape(rng) => *rng,
            StepCtx::Silent => {
                panic!("randomness contract: this mode receives no per-step random bits")
            }
        }
    }
}

/// A finite-state streaming algorithm for MIF. Outputs are a pure function
/// of the current state (plus, in oracle mode, the captured oracle string),
/// matching the one-state-one-output convention.
pub trait Automaton {
    fn mode(&self) -> RandomnessMode;
    /// Universe size `n`; items are `1..=n`.
    fn universe(&self) -> u64;
    /// Maximum stream length this automaton is built for.
    fn capacity(&self) -> u64;
    /// The bit budget `z = log2 |states|` this automaton claims.
    fn declared_bits(&self) -> u64;
    /// Reset to a fresh initial state, drawing from `ctx` as the mode allows.
    fn init(&mut self, ctx: InitCtx<'_>);
    fn update(&mut self, item: u64, ctx: StepCtx<'_>);
    fn output(&self) -> Output;
    /// Serialize the current state; the engine measures the width after
    /// every step and holds it against `declared_bits`.
    fn encode_state(&self, sink: &mut BitSink);
}

/// Re-declares an automaton under a more generous randomness mode, which the
/// model hierarchy permits without any change in behavior or space:
/// deterministic automata run anywhere, and random-seed automata run as
/// random-tape or random-oracle (the oracle supplies the init draw for free).
pub struct ModeRelax<A: Automaton> {
    inner: A,
    mode: RandomnessMode,
}

impl<A: Automaton> ModeRelax<A> {
    pub fn new(inner: A, mode: RandomnessMode) -> Result<Self, EngineError> {
        use RandomnessMode::*;
        let ok = match (inner.mode(), mode) {
            (a, b) if a == b => true,
            (Deterministic, _) => true,
            (RandomSeed, RandomTape) | (RandomSeed, RandomOracle) => true,
            _ => false,
        };
        if !ok {
            return Err(EngineError::InvalidInstance {
                n: inner.universe(),
                ell: inner.capacity(),
                delta: f64::NAN,
            });
        }
        Ok(ModeRelax { inner, mode })
    }

    pub fn into_inner(self) -> A {
        self.inner
    }
}

impl<A: Automaton> Automaton for ModeRelax<A> {
    fn mode(&self) -> RandomnessMode {
        self.mode
    }
    fn universe(&self) -> u64 {
        self.inner.universe()
    }
    fn capacity(&self) -> u64 {
        self.inner.capacity()
    }
    fn declared_bits(&self) -> u64 {
        self.inner.declared_bits()
    }
    fn init(&mut self, mut ctx: InitCtx<'_>) {
        match (&mut ctx, self.inner.mode()) {
            (InitCtx::Oracle(oracle), RandomnessMode::RandomSeed) => {
                // The oracle pays for the seed draw.
                let mut rng = ChaCha12Rng::seed_from_u64(oracle.word(u64::MAX, 0));
                self.inner.init(InitCtx::Seeded(&mut rng));
            }
            (_, RandomnessMode::Deterministic) => self.inner.init(InitCtx::Fixed),
            _ => self.inner.init(ctx),
        }
    }
    fn update(&mut self, item: u64, ctx: StepCtx<'_>) {
        match self.inner.mode() {
            RandomnessMode::RandomTape => self.inner.update(item, ctx),
            _ => self.inner.update(item, StepCtx::Silent),
        }
    }
    fn output(&self) -> Output {
        self.inner.output()
    }
    fn encode_state(&self, sink: &mut BitSink) {
        self.inner.encode_state(sink)
    }
}

/// Runs a random-tape automaton in the random-oracle model by keeping a step
/// counter and deriving each step's fresh bits from an unread part of the
/// oracle string. The counter is genuine state, so the declared budget grows
/// by exactly `ceil(log2 ell)` bits.
pub struct OracleStepped<A: Automaton> {
    inner: A,
    oracle: Option<Oracle>,
    step: u64,
}

impl<A: Automaton> OracleStepped<A> {
    pub fn new(inner: A) -> Self {
        assert_eq!(inner.mode(), RandomnessMode::RandomTape);
        OracleStepped {
            inner,
            oracle: None,
            step: 0,
        }
    }

    fn step_width(&self) -> u32 {
        ceil_log2(self.inner.capacity())
    }
}

impl<A: Automaton> Automaton for OracleStepped<A> {
    fn mode(&self) -> RandomnessMode {
        RandomnessMode::RandomOracle
    }
    fn universe(&self) -> u64 {
        self.inner.universe()
    }
    fn capacity(&self) -> u64 {
        self.inner.capacity()
    }
    fn declared_bits(&self) -> u64 {
        self.inner.declared_bits() + self.step_width() as u64
    }
    fn init(&mut self, ctx: InitCtx<'_>) {
        let oracle = match ctx {
            InitCtx::Oracle(o) => o,
            _ => panic!("randomness contract: OracleStepped runs in oracle mode"),
        };
        self.step = 0;
        let mut init_rng = ChaCha12Rng::seed_from_u64(oracle.word(u64::MAX - 1, 0));
        self.inner.init(InitCtx::Seeded(&mut init_rng));
        self.oracle = Some(oracle);
    }
    fn update(&mut self, item: u64, _ctx: StepCtx<'_>) {
        let oracle = self.oracle.as_ref().expect("init before update");
        let mut seed = [0u8; 32];
        for (i, chunk) in seed.chunks_mut(8).enumerate() {
            chunk.copy_from_slice(&oracle.word(self.step, i as u64).to_le_bytes());
        }
        let mut fresh = ChaCha12Rng::from_seed(seed);
        self.inner.update(item, StepCtx::Tape(&mut fresh));
        self.step = (self.step + 1).min(self.inner.capacity().saturating_sub(1));
    }
    fn output(&self) -> Output {
        self.inner.output()
    }
    fn encode_state(&self, sink: &mut BitSink) {
        self.inner.encode_state(sink);
        sink.push(self.step, self.step_width());
    }
}
