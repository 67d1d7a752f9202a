use std::collections::HashMap;

use crate::algorithms::AlgorithmError;
use crate::engine::{
    ceil_log2, sample_distinct, Automaton, BitSink, InitCtx, Instance, Output, RandomnessMode,
    StepCtx,
};

/// Random-seed MIF: partition `[n]` into `s` blocks, draw (once, at init) a
/// random list `L` of `k` distinct block indices, and run a deterministic
/// bitmap instance inside the currently active listed block. A block is
/// covered once any of its elements arrives; covered list entries are
/// skipped. The inner instance is replaced after it has consumed its update
/// budget of `ceil(ell/t)` inputs (or exhausted its candidates, for blocks
/// smaller than the budget). The algorithm aborts when no uncovered list
/// entry remains past the cursor.
///
/// All randomness is drawn at init and stored in state, so the list is
/// billed: `k * ceil(log2 s)` bits of the budget pay for `L` itself.
pub struct SeedBlock {
    n: u64,
    ell: u64,
    s: u64,
    k: u64,
    /// Update budget of one inner instance.
    budget: u64,
    /// Block size `ceil(n/s)`; the final block may be smaller.
    block_len: u64,
    list: Vec<u64>,
    list_pos: HashMap<u64, usize>,
    covered: Vec<bool>,
    cursor: usize,
    inner_cand: u64,
    inner_seen: Vec<u64>,
    inner_updates: u64,
    aborted: bool,
}

impl SeedBlock {
    pub fn new(inst: Instance, t: u64, k: u64, s: u64) -> Result<Self, AlgorithmError> {
        if t < 1 || t > inst.ell {
            return Err(AlgorithmError::Unsupported {
                reason: format!("part count t={t} must satisfy 1 <= t <= ell={}", inst.ell),
            });
        }
        if s < 1 || s > inst.n || k < 1 || k > s {
            return Err(AlgorithmError::Unsupported {
                reason: format!("need 1 <= k <= s <= n (got k={k}, s={s}, n={})", inst.n),
            });
        }
        let budget = inst.ell.div_ceil(t);
        let inner_words = (budget as usize + 1).div_ceil(64);
        Ok(SeedBlock {
            n: inst.n,
            ell: inst.ell,
            s,
            k,
            budget,
            block_len: inst.n.div_ceil(s),
            list: Vec::new(),
            list_pos: HashMap::new(),
            covered: vec![false; k as usize],
            cursor: 0,
            inner_cand: 0,
            inner_seen: vec![0; inner_words],
            inner_updates: 0,
            aborted: false,
        })
    }

    /// Default sizing: `k = 2t` and `s = 4*ell` rounded up to a power of
    /// two, both capped by the universe.
    pub fn with_defaults(inst: Instance, t: u64) -> Result<Self, AlgorithmError> {
        let s = (4 * inst.ell).next_power_of_two().min(inst.n);
        let k = (2 * t).min(s);
        SeedBlock::new(inst, t, k, s)
    }

    fn block_of(&self, item: u64) -> u64 {
        (item - 1) / self.block_len + 1
    }

    fn block_start(&self, block: u64) -> u64 {
        (block - 1) * self.block_len + 1
    }

    fn block_size(&self, block: u64) -> u64 {
        let start = self.block_start(block);
        if start > self.n {
            0
        } else {
            (self.n - start + 1).min(self.block_len)
        }
    }

    fn load_inner(&mut self) {
        let block = self.list[self.cursor];
        self.inner_cand = (self.budget + 1).min(self.block_size(block));
        self.inner_seen.fill(0);
        self.inner_updates = 0;
    }

    fn inner_bit(&self, rank0: u64) -> bool {
        self.inner_seen[(rank0 / 64) as usize] >> (rank0 % 64) & 1 == 1
    }

    fn inner_seen_count(&self) -> u64 {
        self.inner_seen.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Move the cursor to the least later uncovered list entry, skipping
    /// entries whose blocks cannot produce an output; abort if none is left.
    fn advance(&mut self) {
        loop {
            match (self.cursor + 1..self.k as usize).find(|&j| !self.covered[j]) {
                None => {
                    self.aborted = true;
                    return;
                }
                Some(j) => {
                    self.cursor = j;
                    self.load_inner();
                    if self.inner_cand > 0 {
                        return;
                    }
                }
            }
        }
    }

    fn inner_exhausted(&self) -> bool {
        self.inner_updates >= self.budget || self.inner_seen_count() >= self.inner_cand
    }
}

impl Automaton for SeedBlock {
    fn mode(&self) -> RandomnessMode {
        RandomnessMode::RandomSeed
    }
    fn universe(&self) -> u64 {
        self.n
    }
    fn capacity(&self) -> u64 {
        self.ell
    }
    fn declared_bits(&self) -> u64 {
        let list_bits = self.k * ceil_log2(self.s) as u64;
        let cursor_bits = ceil_log2(self.k) as u64;
        let inner_bits = self.budget + 1 + ceil_log2(self.budget + 1) as u64;
        list_bits + self.k + cursor_bits + inner_bits + 1
    }
    fn init(&mut self, mut ctx: InitCtx<'_>) {
        let rng = ctx
            .rng()
            .expect("randomness contract: SeedBlock samples its list at init");
        self.list = sample_distinct(rng, self.k, self.s);
        self.list_pos = self.list.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        self.covered.fill(false);
        self.cursor = 0;
        self.aborted = false;
        self.load_inner();
        if self.inner_cand == 0 {
            self.advance();
        }
    }
    fn update(&mut self, item: u64, _ctx: StepCtx<'_>) {
        if self.aborted {
            return;
        }
        let block = self.block_of(item);
        if let Some(&pos) = self.list_pos.get(&block) {
            self.covered[pos] = true;
        }
        if block == self.list[self.cursor] {
            let rank = item - self.block_start(block) + 1;
            if rank <= self.inner_cand {
                self.inner_seen[((rank - 1) / 64) as usize] |= 1 << ((rank - 1) % 64);
            }
            self.inner_updates += 1;
            if self.inner_exhausted() {
                self.advance();
            }
        }
    }
    fn output(&self) -> Output {
        if self.aborted {
            return Output::Abort;
        }
        let rank = (0..self.inner_cand).find(|&r| !self.inner_bit(r));
        match rank {
            Some(r) => Output::Item(self.block_start(self.list[self.cursor]) + r),
            None => Output::Abort,
        }
    }
    fn encode_state(&self, sink: &mut BitSink) {
        let width = ceil_log2(self.s);
        for &b in &self.list {
            sink.push(b - 1, width);
        }
        for &c in &self.covered {
            sink.push_bit(c);
        }
        sink.push(self.cursor as u64, ceil_log2(self.k));
        let mut left = self.budget + 1;
        for word in &self.inner_seen {
            let w = left.min(64) as u32;
            sink.push(*word, w);
            left -= w as u64;
        }
        sink.push(self.inner_updates, ceil_log2(self.budget + 1));
        sink.push_bit(self.aborted);
    }
}
