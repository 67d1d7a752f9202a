use std::collections::HashMap;

use crate::engine::{
    sample_distinct, Automaton, BitSink, InitCtx, Instance, Output, RandomnessMode, StepCtx,
};

/// Random-oracle MIF: interpret the oracle string as a uniformly random list
/// `L` of `ell+1` distinct items, track which list positions have been
/// covered by inputs, and report the first uncovered entry. The list and its
/// lookup index live in the oracle, so only the coverage set `J` is state.
///
/// `ell` inputs cannot cover `ell+1` distinct entries, so the algorithm has
/// zero mistake probability and never aborts, against every adversary.
pub struct OracleList {
    n: u64,
    ell: u64,
    list: Vec<u64>,
    position: HashMap<u64, usize>,
    covered: Vec<bool>,
}

impl OracleList {
    pub fn new(inst: Instance) -> Self {
        assert!(inst.ell < inst.n);
        OracleList {
            n: inst.n,
            ell: inst.ell,
            list: Vec::new(),
            position: HashMap::new(),
            covered: vec![false; inst.ell as usize + 1],
        }
    }

    /// Number of covered list positions; exposed for coverage statistics.
    pub fn covered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }

    /// Index of the list entry currently being reported.
    pub fn output_position(&self) -> Option<usize> {
        self.covered.iter().position(|&c| !c)
    }
}

impl Automaton for OracleList {
    fn mode(&self) -> RandomnessMode {
        RandomnessMode::RandomOracle
    }
    fn universe(&self) -> u64 {
        self.n
    }
    fn capacity(&self) -> u64 {
        self.ell
    }
    fn declared_bits(&self) -> u64 {
        self.ell + 1
    }
    fn init(&mut self, ctx: InitCtx<'_>) {
        let oracle = match ctx {
            InitCtx::Oracle(o) => o,
            _ => panic!("randomness contract: OracleList runs in oracle mode"),
        };
        let mut reader = oracle.reader(0);
        self.list = sample_distinct(&mut reader, self.ell + 1, self.n);
        self.position = self.list.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        self.covered.fill(false);
    }
    fn update(&mut self, item: u64, _ctx: StepCtx<'_>) {
        if let Some(&p) = self.position.get(&item) {
            self.covered[p] = true;
        }
    }
    fn output(&self) -> Output {
        match self.covered.iter().position(|&c| !c) {
            Some(p) => Output::Item(self.list[p]),
            None => Output::Abort,
        }
    }
    fn encode_state(&self, sink: &mut BitSink) {
        for &c in &self.covered {
            sink.push_bit(c);
        }
    }
}
