use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::engine::automaton::{Automaton, BitSink, InitCtx, StepCtx};
use crate::engine::oracle::Oracle;
use crate::engine::rng::mix2;
use crate::engine::stats::wilson_halfwidth;
use crate::engine::transcript::Transcript;
use crate::engine::types::{GameResult, Instance, Output, RandomnessMode, SpaceReport, Verdict};
use crate::engine::EngineError;

/// A strategy for choosing the next stream input from the outputs observed
/// so far. Adversaries never see automaton internals, only the transcript.
pub trait Adversary {
    fn kind(&self) -> &'static str;
    /// Clear any per-run state before a fresh game.
    fn reset(&mut self) {}
    /// Choose the next input in `[1, n]`. Deterministic adversaries ignore
    /// `rng`.
    fn next_input(&mut self, transcript: &Transcript, n: u64, rng: &mut ChaCha12Rng) -> u64;
}

const SEED_LANE_ORACLE: u64 = 0x6f7261636c65; // "oracle"
const SEED_LANE_INIT: u64 = 1;
const SEED_LANE_TAPE: u64 = 2;
const SEED_LANE_ADVERSARY: u64 = 3;

/// Runs one full game. The run is a deterministic function of
/// `(automaton, adversary, instance, seed)`: the seed splits into
/// independent lanes for the automaton's init draw, its tape, the oracle
/// string, and the adversary's own coins.
///
/// Per round the adversary reads the transcript so far and emits an input;
/// the automaton transitions and reports. A mistake (output equals an
/// earlier input) fixes the verdict but the run continues; an abort ends it.
pub fn run_game(
    automaton: &mut dyn Automaton,
    adversary: &mut dyn Adversary,
    inst: Instance,
    seed: u64,
) -> Result<(Transcript, GameResult), EngineError> {
    if automaton.universe() != inst.n {
        return Err(EngineError::UniverseMismatch {
            automaton_n: automaton.universe(),
            instance_n: inst.n,
        });
    }
    if automaton.capacity() < inst.ell {
        return Err(EngineError::CapacityExceeded {
            capacity: automaton.capacity(),
            ell: inst.ell,
        });
    }

    let mut init_rng = ChaCha12Rng::seed_from_u64(mix2(seed, SEED_LANE_INIT));
    let mut tape_rng = ChaCha12Rng::seed_from_u64(mix2(seed, SEED_LANE_TAPE));
    let mut adv_rng = ChaCha12Rng::seed_from_u64(mix2(seed, SEED_LANE_ADVERSARY));

    adversary.reset();
    match automaton.mode() {
        RandomnessMode::Deterministic => automaton.init(InitCtx::Fixed),
        RandomnessMode::RandomSeed | RandomnessMode::RandomTape => {
            automaton.init(InitCtx::Seeded(&mut init_rng))
        }
        RandomnessMode::RandomOracle => {
            automaton.init(InitCtx::Oracle(Oracle::new(mix2(seed, SEED_LANE_ORACLE))))
        }
    }

    let declared = automaton.declared_bits();
    let mut max_bits = measure(automaton, 0, declared)?;

    let mut transcript = Transcript::new(automaton.output());
    let mut seen: HashSet<u64> = HashSet::new();
    let mut verdict = Verdict::Ok;

    if transcript.initial_output() == Some(Output::Abort) {
        // Degenerate: an automaton that aborts before any input.
        let result = GameResult {
            verdict: Verdict::Abort(0),
            space: SpaceReport {
                declared_bits: declared,
                max_observed_bits: max_bits,
            },
        };
        return Ok((transcript, result));
    }

    for step in 1..=inst.ell as usize {
        let input = adversary.next_input(&transcript, inst.n, &mut adv_rng);
        if input < 1 || input > inst.n {
            return Err(EngineError::AdversaryRange {
                item: input,
                n: inst.n,
            });
        }
        match automaton.mode() {
            RandomnessMode::RandomTape => automaton.update(input, StepCtx::Tape(&mut tape_rng)),
            _ => automaton.update(input, StepCtx::Silent),
        }
        let bits = measure(automaton, step, declared)?;
        max_bits = max_bits.max(bits);
        seen.insert(input);

        let out = automaton.output();
        transcript.push(input, out);
        match out {
            Output::Abort => {
                if verdict.is_ok() {
                    verdict = Verdict::Abort(step);
                }
                break;
            }
            Output::Item(v) => {
                if verdict.is_ok() && seen.contains(&v) {
                    verdict = Verdict::Mistake(step);
                }
            }
        }
    }

    let result = GameResult {
        verdict,
        space: SpaceReport {
            declared_bits: declared,
            max_observed_bits: max_bits,
        },
    };
    Ok((transcript, result))
}

fn measure(automaton: &dyn Automaton, step: usize, declared: u64) -> Result<u64, EngineError> {
    let mut sink = BitSink::new();
    automaton.encode_state(&mut sink);
    let bits = sink.check()?;
    if bits > declared {
        return Err(EngineError::SpaceContract {
            step,
            observed: bits,
            declared,
        });
    }
    Ok(bits)
}

/// Per-trial outcome retained by [`estimate_error`] for CSV export.
#[derive(Debug, Clone, Copy)]
pub struct TrialRecord {
    pub trial: u64,
    pub verdict: Verdict,
    pub max_observed_bits: u64,
}

/// Aggregated failure statistics over independent trials.
#[derive(Debug, Clone)]
pub struct ErrorEstimate {
    pub trials: u64,
    pub mistakes: u64,
    pub aborts: u64,
    pub mistake_rate: f64,
    pub abort_rate: f64,
    /// 95% Wilson half-widths for the mistake, abort, and combined rates.
    pub mistake_halfwidth: f64,
    pub abort_halfwidth: f64,
    pub combined_halfwidth: f64,
    pub records: Vec<TrialRecord>,
}

impl ErrorEstimate {
    pub fn combined_rate(&self) -> f64 {
        self.mistake_rate + self.abort_rate
    }

    fn from_records(records: Vec<TrialRecord>) -> Self {
        let trials = records.len() as u64;
        let mistakes = records.iter().filter(|r| r.verdict.is_mistake()).count() as u64;
        let aborts = records.iter().filter(|r| r.verdict.is_abort()).count() as u64;
        ErrorEstimate {
            trials,
            mistakes,
            aborts,
            mistake_rate: mistakes as f64 / trials as f64,
            abort_rate: aborts as f64 / trials as f64,
            mistake_halfwidth: wilson_halfwidth(mistakes, trials),
            abort_halfwidth: wilson_halfwidth(aborts, trials),
            combined_halfwidth: wilson_halfwidth(mistakes + aborts, trials),
            records,
        }
    }
}

/// Empirical mistake/abort rates over `trials` independent runs. Trial `i`
/// replays with seed `mix2(seed, i)`, so results are reproducible and agree
/// with the parallel variant.
pub fn estimate_error(
    automaton: &mut dyn Automaton,
    adversary: &mut dyn Adversary,
    inst: Instance,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate, EngineError> {
    assert!(trials >= 1);
    let mut records = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let (_, result) = run_game(automaton, adversary, inst, mix2(seed, trial))?;
        records.push(TrialRecord {
            trial,
            verdict: result.verdict,
            max_observed_bits: result.space.max_observed_bits,
        });
    }
    Ok(ErrorEstimate::from_records(records))
}

/// Same estimate, with trials partitioned over `threads` worker threads.
/// Each trial derives its own seed, so the merged result is byte-identical
/// to the sequential one regardless of scheduling.
pub fn estimate_error_parallel<A, B>(
    make_automaton: A,
    make_adversary: B,
    inst: Instance,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<ErrorEstimate, EngineError>
where
    A: Fn() -> Box<dyn Automaton> + Sync,
    B: Fn() -> Box<dyn Adversary> + Sync,
{
    assert!(trials >= 1);
    let threads = threads.max(1).min(trials as usize);
    let chunk = trials.div_ceil(threads as u64);
    let results: Vec<Result<Vec<TrialRecord>, EngineError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..threads as u64 {
            let make_automaton = &make_automaton;
            let make_adversary = &make_adversary;
            handles.push(scope.spawn(move || {
                let mut automaton = make_automaton();
                let mut adversary = make_adversary();
                let mut records = Vec::new();
                for trial in (w * chunk)..((w + 1) * chunk).min(trials) {
                    let (_, result) = run_game(
                        automaton.as_mut(),
                        adversary.as_mut(),
                        inst,
                        mix2(seed, trial),
                    )?;
                    records.push(TrialRecord {
                        trial,
                        verdict: result.verdict,
                        max_observed_bits: result.space.max_observed_bits,
                    });
                }
                Ok(records)
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut records = Vec::with_capacity(trials as usize);
    for r in results {
        records.extend(r?);
    }
    records.sort_by_key(|r| r.trial);
    Ok(ErrorEstimate::from_records(records))
}

/// Offline MIF correctness check: every step whose output equals some
/// earlier-or-current input, 1-based.
pub fn check_transcript(t: &Transcript) -> Vec<usize> {
    let mut seen: HashSet<u64> = HashSet::new();
    let mut violations = Vec::new();
    for (i, &(input, output)) in t.rounds().iter().enumerate() {
        seen.insert(input);
        if let Output::Item(v) = output {
            if seen.contains(&v) {
                violations.push(i + 1);
            }
        }
    }
    violations
}
