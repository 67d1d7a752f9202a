use std::collections::BTreeMap;

use crate::engine::{Automaton, BitSink, InitCtx, Output, RandomnessMode, StepCtx};

/// Error amplification by majority vote: `p` independent copies run in
/// product state and the most common copy output wins (ties go to the
/// smallest item; the abort sentinel wins only outright). Useful when the
/// inner automaton has one canonical output per stream, where voting drives
/// the error of a `delta`-error copy down to `(2*delta)^(p/30)`.
pub struct MajorityVote {
    copies: Vec<Box<dyn Automaton>>,
}

impl MajorityVote {
    /// `make(i)` builds copy `i`; all copies must agree on mode and shape.
    pub fn new(p: usize, make: impl Fn(usize) -> Box<dyn Automaton>) -> Self {
        assert!(p >= 1 && p % 2 == 1, "vote count must be odd");
        let copies: Vec<_> = (0..p).map(make).collect();
        let mode = copies[0].mode();
        let n = copies[0].universe();
        assert!(copies.iter().all(|c| c.mode() == mode && c.universe() == n));
        MajorityVote { copies }
    }

    pub fn p(&self) -> usize {
        self.copies.len()
    }
}

impl Automaton for MajorityVote {
    fn mode(&self) -> RandomnessMode {
        self.copies[0].mode()
    }
    fn universe(&self) -> u64 {
        self.copies[0].universe()
    }
    fn capacity(&self) -> u64 {
        self.copies.iter().map(|c| c.capacity()).min().unwrap()
    }
    fn declared_bits(&self) -> u64 {
        self.copies.iter().map(|c| c.declared_bits()).sum()
    }
    fn init(&mut self, mut ctx: InitCtx<'_>) {
        match &mut ctx {
            InitCtx::Oracle(oracle) => {
                // Each copy reads its own independent slice of the string.
                for (i, c) in self.copies.iter_mut().enumerate() {
                    c.init(InitCtx::Oracle(oracle.fork(i as u64)));
                }
            }
            InitCtx::Fixed => {
                for c in &mut self.copies {
                    c.init(InitCtx::Fixed);
                }
            }
            InitCtx::Seeded(rng) => {
                for c in &mut self.copies {
                    c.init(InitCtx::Seeded(rng));
                }
            }
        }
    }
    fn update(&mut self, item: u64, mut ctx: StepCtx<'_>) {
        match &mut ctx {
            StepCtx::Silent => {
                for c in &mut self.copies {
                    c.update(item, StepCtx::Silent);
                }
            }
            StepCtx::Tape(rng) => {
                for c in &mut self.copies {
                    c.update(item, StepCtx::Tape(rng));
                }
            }
        }
    }
    fn output(&self) -> Output {
        let mut counts: BTreeMap<Output, usize> = BTreeMap::new();
        for c in &self.copies {
            *counts.entry(c.output()).or_default() += 1;
        }
        let best = counts.values().copied().max().unwrap();
        // BTreeMap order puts Item(small) first and Abort last, so the first
        // maximal entry implements the tie-break.
        counts
            .into_iter()
            .find(|&(_, c)| c == best)
            .map(|(o, _)| o)
            .unwrap()
    }
    fn encode_state(&self, sink: &mut BitSink) {
        for c in &self.copies {
            c.encode_state(sink);
        }
    }
}
