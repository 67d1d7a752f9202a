use crate::engine::{Automaton, BitSink, InitCtx, Instance, Output, RandomnessMode, StepCtx};

/// Deterministic MIF: fix the candidate set `{1..ell+1}`, remember which
/// candidates appeared, and report the least unseen one. `ell` inputs can
/// never cover all `ell+1` candidates, so it never mistakes and never
/// aborts, at a cost of `ell+1` bits.
pub struct DetBitmap {
    n: u64,
    ell: u64,
    seen: Vec<u64>,
}

impl DetBitmap {
    pub fn new(inst: Instance) -> Self {
        assert!(
            inst.ell < inst.n,
            "needs ell < n so a candidate is always free"
        );
        let words = (inst.ell as usize + 1).div_ceil(64);
        DetBitmap {
            n: inst.n,
            ell: inst.ell,
            seen: vec![0; words],
        }
    }

    fn candidates(&self) -> u64 {
        self.ell + 1
    }
}

impl Automaton for DetBitmap {
    fn mode(&self) -> RandomnessMode {
        RandomnessMode::Deterministic
    }
    fn universe(&self) -> u64 {
        self.n
    }
    fn capacity(&self) -> u64 {
        self.ell
    }
    fn declared_bits(&self) -> u64 {
        self.candidates()
    }
    fn init(&mut self, _ctx: InitCtx<'_>) {
        self.seen.fill(0);
    }
    fn update(&mut self, item: u64, _ctx: StepCtx<'_>) {
        if item <= self.candidates() {
            let bit = item - 1;
            self.seen[(bit / 64) as usize] |= 1 << (bit % 64);
        }
    }
    fn output(&self) -> Output {
        for c in 0..self.candidates() {
            if self.seen[(c / 64) as usize] >> (c % 64) & 1 == 0 {
                return Output::Item(c + 1);
            }
        }
        // Unreachable within capacity: ell inputs cover at most ell of the
        // ell+1 candidates.
        Output::Abort
    }
    fn encode_state(&self, sink: &mut BitSink) {
        let mut left = self.candidates();
        for word in &self.seen {
            let width = left.min(64) as u32;
            sink.push(*word, width);
            left -= width as u64;
        }
    }
}
