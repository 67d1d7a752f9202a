use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::engine::{mix2, Automaton, InitCtx, Oracle, Output, RandomnessMode, StepCtx};
use crate::reductions::ReductionError;

/// One-way communication problem: Alice holds an `a`-subset of `[m]`, Bob
/// must output a `b`-subset disjoint from it.
#[derive(Debug, Clone, Copy)]
pub struct AvoidInstance {
    pub m: u64,
    pub a: u64,
    pub b: u64,
    pub delta: f64,
}

impl AvoidInstance {
    pub fn new(m: u64, a: u64, b: u64, delta: f64) -> Result<Self, ReductionError> {
        if a < 1 || b < 1 || a + b > m || !(0.0..=1.0).contains(&delta) {
            return Err(ReductionError::InvalidAvoid { m, a, b, delta });
        }
        Ok(AvoidInstance { m, a, b, delta })
    }
}

/// Outcome of one protocol run built from an MIF automaton.
#[derive(Debug, Clone)]
pub struct AvoidOutcome {
    /// Alice's message: the serialized automaton state.
    pub message_bits: u64,
    pub bob_set: Vec<u64>,
    /// Protocol success: `b` distinct outputs, none in Alice's set.
    pub disjoint: bool,
    /// The automaton aborted during Bob's phase.
    pub aborted: bool,
}

/// Runs the protocol: Alice feeds `sort(A)` into an MIF automaton and sends
/// its state; Bob resumes and plays the echo strategy, collecting `b`
/// outputs (the last one needs no feedback, so a stream capacity of
/// `a + b - 1` suffices). Shared randomness (the oracle string or seed) is
/// public and costs nothing; the message is the state alone.
pub fn avoid_from_mif(
    automaton: &mut dyn Automaton,
    inst: &AvoidInstance,
    alice_set: &[u64],
    seed: u64,
) -> Result<AvoidOutcome, ReductionError> {
    assert_eq!(alice_set.len() as u64, inst.a);
    if automaton.universe() != inst.m {
        return Err(crate::engine::EngineError::UniverseMismatch {
            automaton_n: automaton.universe(),
            instance_n: inst.m,
        }
        .into());
    }
    if automaton.capacity() < inst.a + inst.b - 1 {
        return Err(crate::engine::EngineError::CapacityExceeded {
            capacity: automaton.capacity(),
            ell: inst.a + inst.b - 1,
        }
        .into());
    }

    let mut init_rng = ChaCha12Rng::seed_from_u64(mix2(seed, 1));
    let mut tape_rng = ChaCha12Rng::seed_from_u64(mix2(seed, 2));
    match automaton.mode() {
        RandomnessMode::Deterministic => automaton.init(InitCtx::Fixed),
        RandomnessMode::RandomSeed | RandomnessMode::RandomTape => {
            automaton.init(InitCtx::Seeded(&mut init_rng))
        }
        RandomnessMode::RandomOracle => automaton.init(InitCtx::Oracle(Oracle::new(seed))),
    }

    let mut sorted = alice_set.to_vec();
    sorted.sort_unstable();
    let step = |a: &mut dyn Automaton, item: u64, tape: &mut ChaCha12Rng| match a.mode() {
        RandomnessMode::RandomTape => a.update(item, StepCtx::Tape(tape)),
        _ => a.update(item, StepCtx::Silent),
    };
    for &item in &sorted {
        step(automaton, item, &mut tape_rng);
    }

    // Bob's phase: echo until b outputs are in hand. The state (= the
    // message) carries over; the final output is not fed back.
    let mut bob = Vec::new();
    let mut aborted = false;
    for i in 0..inst.b {
        match automaton.output() {
            Output::Abort => {
                aborted = true;
                break;
            }
            Output::Item(v) => {
                bob.push(v);
                if i + 1 < inst.b {
                    step(automaton, v, &mut tape_rng);
                }
            }
        }
    }

    let alice: BTreeSet<u64> = sorted.iter().copied().collect();
    let distinct: BTreeSet<u64> = bob.iter().copied().collect();
    let disjoint = !aborted && distinct.len() as u64 == inst.b && distinct.is_disjoint(&alice);
    Ok(AvoidOutcome {
        message_bits: automaton.declared_bits(),
        bob_set: bob,
        disjoint,
        aborted,
    })
}

/// Communication lower bound for AVOID: any one-way protocol with error
/// `delta` needs at least `a*b/(m*ln 2) + log2(1-delta)` bits.
pub fn avoid_lb(inst: &AvoidInstance) -> Result<f64, ReductionError> {
    if inst.delta >= 1.0 {
        return Err(ReductionError::DegenerateDelta);
    }
    Ok(
        inst.a as f64 * inst.b as f64 / (inst.m as f64 * std::f64::consts::LN_2)
            + (1.0 - inst.delta).log2(),
    )
}
