use std::sync::Arc;

use rand::RngCore;

use crate::engine::automaton::{Automaton, BitSink, InitCtx, StepCtx};
use crate::engine::ceil_log2;
use crate::engine::rng::uniform_below;
use crate::engine::types::{Output, RandomnessMode};

/// An automaton with an enumerable state space and explicit transition
/// probabilities. Exact analyses (posterior filtering, minimax search,
/// adaptive-adversary construction) work on this view; micro-scale automata
/// implement it in addition to the runtime [`Automaton`] interface.
pub trait FiniteAutomaton: Send + Sync {
    fn universe(&self) -> u64;
    fn num_states(&self) -> usize;
    /// Deterministic, random-seed, or random-tape. Oracle-mode automata have
    /// no faithful finite-chain view (the oracle correlates all steps).
    fn mode(&self) -> RandomnessMode;
    /// Initial distribution as `(state, probability)` pairs summing to 1.
    fn init_dist(&self) -> Vec<(usize, f64)>;
    /// The one output associated with each state.
    fn output_of(&self, state: usize) -> Output;
    /// Distribution of the next state on reading `item`, summing to 1.
    fn transition(&self, state: usize, item: u64) -> Vec<(usize, f64)>;

    fn declared_bits(&self) -> u64 {
        ceil_log2(self.num_states() as u64) as u64
    }

    /// All distinct outputs the automaton can ever report.
    fn output_alphabet(&self) -> Vec<Output> {
        let mut outs: Vec<Output> = (0..self.num_states()).map(|s| self.output_of(s)).collect();
        outs.sort();
        outs.dedup();
        outs
    }
}

/// Advance a weight vector over states by one input, in place.
pub(crate) fn chain_step(chain: &dyn FiniteAutomaton, weights: &[f64], item: u64) -> Vec<f64> {
    let mut next = vec![0.0; chain.num_states()];
    for (s, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (t, p) in chain.transition(s, item) {
            next[t] += w * p;
        }
    }
    next
}

#[derive(Debug, Clone)]
pub enum TransitionKind {
    /// `next[state][item-1]` — deterministic transition table.
    Deterministic(Vec<Vec<usize>>),
    /// `next[state][item-1]` — rows of `(state, probability)`.
    Stochastic(Vec<Vec<Vec<(usize, f64)>>>),
}

/// A fully tabulated finite automaton; the workhorse for micro instances and
/// exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct TableChain {
    pub n: u64,
    pub mode: RandomnessMode,
    pub outputs: Vec<Output>,
    pub init: Vec<(usize, f64)>,
    pub transitions: TransitionKind,
}

impl TableChain {
    /// The one-state automaton that always reports `value`.
    pub fn const_output(n: u64, value: u64) -> Self {
        TableChain {
            n,
            mode: RandomnessMode::Deterministic,
            outputs: vec![Output::Item(value)],
            init: vec![(0, 1.0)],
            transitions: TransitionKind::Deterministic(vec![vec![0; n as usize]]),
        }
    }

    /// A random-tape automaton that on every input jumps to a uniformly
    /// random state, ignoring the input. Output of state `s` is `values[s]`.
    pub fn uniform_jump(n: u64, values: &[u64]) -> Self {
        let m = values.len();
        let row: Vec<(usize, f64)> = (0..m).map(|s| (s, 1.0 / m as f64)).collect();
        TableChain {
            n,
            mode: RandomnessMode::RandomTape,
            outputs: values.iter().map(|&v| Output::Item(v)).collect(),
            init: row.clone(),
            transitions: TransitionKind::Stochastic(vec![vec![row; n as usize]; m]),
        }
    }

    /// The deterministic bitmap algorithm over candidates `{1..ell+1}` as an
    /// explicit chain (state index = bitmap of seen candidates). Only viable
    /// for micro `ell`.
    pub fn det_bitmap(n: u64, ell: u64) -> Self {
        let c = (ell + 1) as usize;
        assert!(c <= 20, "det_bitmap chain needs 2^(ell+1) states");
        let m = 1usize << c;
        let mut outputs = Vec::with_capacity(m);
        let mut table = Vec::with_capacity(m);
        for s in 0..m {
            let least_unseen = (0..c).find(|b| s >> b & 1 == 0);
            outputs.push(Output::Item(match least_unseen {
                Some(b) => (b + 1) as u64,
                None => ell + 1,
            }));
            let row: Vec<usize> = (1..=n)
                .map(|item| {
                    if item <= c as u64 {
                        s | 1 << (item - 1)
                    } else {
                        s
                    }
                })
                .collect();
            table.push(row);
        }
        TableChain {
            n,
            mode: RandomnessMode::Deterministic,
            outputs,
            init: vec![(0, 1.0)],
            transitions: TransitionKind::Deterministic(table),
        }
    }
}

impl FiniteAutomaton for TableChain {
    fn universe(&self) -> u64 {
        self.n
    }
    fn num_states(&self) -> usize {
        self.outputs.len()
    }
    fn mode(&self) -> RandomnessMode {
        self.mode
    }
    fn init_dist(&self) -> Vec<(usize, f64)> {
        self.init.clone()
    }
    fn output_of(&self, state: usize) -> Output {
        self.outputs[state]
    }
    fn transition(&self, state: usize, item: u64) -> Vec<(usize, f64)> {
        let idx = (item - 1) as usize;
        match &self.transitions {
            TransitionKind::Deterministic(t) => vec![(t[state][idx], 1.0)],
            TransitionKind::Stochastic(t) => t[state][idx].clone(),
        }
    }
}

/// Runs any [`FiniteAutomaton`] as a live [`Automaton`], sampling its
/// transitions with mode-appropriate randomness. State encoding is the state
/// index at fixed width `ceil(log2 #states)`.
pub struct ChainAutomaton {
    chain: Arc<dyn FiniteAutomaton>,
    capacity: u64,
    state: usize,
}

impl ChainAutomaton {
    pub fn new(chain: Arc<dyn FiniteAutomaton>, capacity: u64) -> Self {
        assert_ne!(
            chain.mode(),
            RandomnessMode::RandomOracle,
            "finite chains cover deterministic, seed, and tape modes only"
        );
        ChainAutomaton {
            chain,
            capacity,
            state: 0,
        }
    }

    fn sample(dist: &[(usize, f64)], rng: Option<&mut dyn RngCore>) -> usize {
        if dist.len() == 1 {
            return dist[0].0;
        }
        let rng = rng.expect("randomness contract: stochastic step without a random source");
        let u = uniform_below(rng.next_u64(), 1 << 53) as f64 / (1u64 << 53) as f64;
        let mut acc = 0.0;
        for &(s, p) in dist {
            acc += p;
            if u < acc {
                return s;
            }
        }
        dist.last().expect("nonempty distribution").0
    }
}

impl Automaton for ChainAutomaton {
    fn mode(&self) -> RandomnessMode {
        self.chain.mode()
    }
    fn universe(&self) -> u64 {
        self.chain.universe()
    }
    fn capacity(&self) -> u64 {
        self.capacity
    }
    fn declared_bits(&self) -> u64 {
        self.chain.declared_bits()
    }
    fn init(&mut self, mut ctx: InitCtx<'_>) {
        let dist = self.chain.init_dist();
        self.state = Self::sample(&dist, ctx.rng());
    }
    fn update(&mut self, item: u64, mut ctx: StepCtx<'_>) {
        let dist = self.chain.transition(self.state, item);
        let rng = match (&mut ctx, self.chain.mode()) {
            (StepCtx::Tape(rng), RandomnessMode::RandomTape) => Some(*rng as &mut dyn RngCore),
            _ => None,
        };
        self.state = Self::sample(&dist, rng);
    }
    fn output(&self) -> Output {
        self.chain.output_of(self.state)
    }
    fn encode_state(&self, sink: &mut BitSink) {
        sink.push(self.state as u64, ceil_log2(self.chain.num_states() as u64));
    }
}
